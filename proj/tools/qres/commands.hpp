#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qres/dmrg.hpp"
#include "qres/errors.hpp"
#include "qres/exact_diag.hpp"
#include "qres/mps_io.hpp"
#include "qres/resources.hpp"
#include "qres/spin_model.hpp"
#include "qres/config.hpp"
#include "qres/csv.hpp"
#include "qres/fit.hpp"
#include "qres/svg.hpp"

namespace qres::cli {

enum ExitCode : int { exit_ok = 0, exit_verify_failed = 1, exit_invalid_config = 2, exit_not_converged = 3 };

namespace fs = std::filesystem;

/// Sites above which the auto solver switches from exact diagonalization to DMRG.
inline constexpr std::size_t auto_ed_max_sites = 14;

inline SpinModel make_model(const RunConfig& cfg, LatticeSize size, double h) {
    if (size.height == 1)
        return build_tfim_1d(size.width, h, cfg.periodic);
    return build_tfim_2d(size.width, size.height, h, cfg.periodic);
}

inline std::string resolve_solver(const RunConfig& cfg, LatticeSize size) {
    if (cfg.solver != "auto")
        return cfg.solver;
    return size.sites() <= auto_ed_max_sites ? "ed" : "dmrg";
}

inline Measure parse_measure(const std::string& m) { return m == "rec" ? Measure::REC : Measure::SRE2; }

inline fs::path cache_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("QRES_CACHE_DIR"); env && *env)
        return fs::path(env);
    return fs::path(cfg.out) / "cache";
}

inline fs::path snapshot_path(const RunConfig& cfg, const SpinModel& model, const std::string& solver) {
    const std::string chi = solver == "ghz-analytic" ? "2" : std::to_string(cfg.chi);
    return cache_dir(cfg) / (model.label() + "_h" + format_number(model.field()) + "_chi" + chi + "_" + solver + ".qmps");
}

struct SolvedState {
    MatrixProductState psi;
    double energy = 0.0;
    std::string solver;
    bool converged = true;
};

inline SolvedState solve_ground_state(const RunConfig& cfg, LatticeSize size, double h) {
    const auto model = make_model(cfg, size, h);
    SolvedState out;
    out.solver = resolve_solver(cfg, size);
    if (out.solver == "ghz-analytic") {
        out.psi = make_ghz_mps(model.n_sites());
        out.energy = -model.coupling() * static_cast<double>(model.bonds().size());
    } else if (out.solver == "ed") {
        const auto gs = ed_ground_state(model);
        out.energy = gs.energy;
        out.psi = normalized(mps_from_dense(gs.state, cfg.chi, 1e-14));
    } else {
        DmrgOptions opts;
        opts.max_bond = cfg.chi;
        auto res = dmrg_ground_state(model, opts);
        out.energy = res.energy;
        out.converged = res.converged;
        out.psi = std::move(res.psi);
    }
    return out;
}

/// Cached snapshot if present, otherwise solved (and stored when converged).
inline SolvedState obtain_state(const RunConfig& cfg, LatticeSize size, double h) {
    const auto model = make_model(cfg, size, h);
    const auto solver = resolve_solver(cfg, size);
    const auto path = snapshot_path(cfg, model, solver);
    if (fs::exists(path)) {
        SolvedState s;
        s.psi = load_snapshot(path);
        s.solver = solver;
        return s;
    }
    if (cfg.no_build)
        throw ConfigError("no ground state for " + model.label() + " at h = " + format_number(h) + " in " +
                          cache_dir(cfg).string() + " and --no-build is set");
    auto s = solve_ground_state(cfg, size, h);
    if (s.converged) {
        fs::create_directories(path.parent_path());
        save_snapshot(path, s.psi);
    }
    return s;
}

/// Runs job(i) for i in [0, n) on up to `threads` workers.
template <class Job> void run_jobs(std::size_t n, std::size_t threads, Job&& job) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++)
            job(i);
    };
    const std::size_t k = std::min(threads, n);
    if (k <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < k; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
}

/// Exit code for an exception escaping a job or command.
inline int classify(const std::exception_ptr& e, std::ostream& err) {
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError& x) {
        err << "error: " << x.what() << '\n';
        return exit_invalid_config;
    } catch (const InvalidInput& x) {
        err << "error: " << x.what() << '\n';
        return exit_invalid_config;
    } catch (const ResourceLimit& x) {
        err << "error: " << x.what() << '\n';
        return exit_invalid_config;
    } catch (const std::exception& x) {
        err << "error: " << x.what() << '\n';
        return exit_not_converged;
    }
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline ResourceOptions resource_options(const RunConfig& cfg, Measure m, double default_tol, std::size_t default_xi) {
    auto opts = ResourceOptions::defaults(m);
    opts.tol = cfg.tol > 0.0 ? cfg.tol : default_tol;
    opts.max_bond = cfg.xi > 0 ? cfg.xi : default_xi;
    opts.seed = cfg.seed;
    return opts;
}

inline std::string output_stem(const RunConfig& cfg, const std::string& prefix) {
    return (fs::path(cfg.out) / (prefix + cfg.measure + "_" + cfg.model)).string();
}

// ---------------------------------------------------------------- ground-state

inline int cmd_ground_state(RunConfig cfg, std::ostream& out, std::ostream& err) {
    if (cfg.sizes.empty())
        cfg.sizes = cfg.model == "ising1d" ? parse_sizes("4,6,8") : parse_sizes("3x3");
    if (cfg.h_grid.empty())
        cfg.h_grid = {1.0};
    validate(cfg);

    struct Row {
        SolvedState state;
        double runtime = 0.0;
        std::exception_ptr error;
    };
    const std::size_t nh = cfg.h_grid.size();
    std::vector<Row> rows(cfg.sizes.size() * nh);
    std::mutex log;
    run_jobs(rows.size(), cfg.threads, [&](std::size_t i) {
        const auto size = cfg.sizes[i / nh];
        const double h = cfg.h_grid[i % nh];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            rows[i].state = solve_ground_state(cfg, size, h);
            if (rows[i].state.converged) {
                const auto path = snapshot_path(cfg, make_model(cfg, size, h), rows[i].state.solver);
                fs::create_directories(path.parent_path());
                save_snapshot(path, rows[i].state.psi);
            }
        } catch (...) {
            rows[i].error = std::current_exception();
        }
        rows[i].runtime = seconds_since(t0);
        std::lock_guard lock(log);
        err << "ground-state " << size.str() << " h=" << format_number(h) << " done\n";
    });

    CsvTable table({"size", "h", "energy", "chi_used", "solver", "runtime_s", "status"});
    int code = exit_ok;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto size = cfg.sizes[i / nh];
        const double h = cfg.h_grid[i % nh];
        const auto& r = rows[i];
        std::string status = "ok";
        if (r.error) {
            const int c = classify(r.error, err);
            code = std::max(code, c);
            status = c == exit_invalid_config ? "invalid" : "not-converged";
            table.add({size.str(), format_number(h), "nan", "0", resolve_solver(cfg, size),
                       format_number(r.runtime), status});
            continue;
        }
        if (!r.state.converged) {
            status = "not-converged";
            code = std::max(code, static_cast<int>(exit_not_converged));
        }
        table.add({size.str(), format_number(h), format_number(r.state.energy), std::to_string(r.state.psi.max_bond()),
                   r.state.solver, format_number(r.runtime), status});
    }
    fs::create_directories(cfg.out);
    const auto path = (fs::path(cfg.out) / ("ground_state_" + cfg.model + ".csv")).string();
    table.write(path);
    out << table.str();
    err << "wrote " << path << '\n';
    return code;
}

// --------------------------------------------------------------------- measure

inline int cmd_measure(RunConfig cfg, std::ostream& out, std::ostream& err) {
    if (cfg.sizes.empty())
        cfg.sizes = cfg.model == "ising1d" ? parse_sizes("4,6,8") : parse_sizes("3x3");
    if (cfg.h_grid.empty())
        cfg.h_grid = parse_h_grid("0.1:1.0:0.1");
    validate(cfg);
    const Measure m = parse_measure(cfg.measure);
    const auto opts = resource_options(cfg, m, 1e-8, m == Measure::SRE2 ? 80 : 40);

    struct Row {
        ResourceReport report;
        bool state_converged = true;
        double runtime = 0.0;
        std::exception_ptr error;
    };
    const std::size_t nh = cfg.h_grid.size();
    std::vector<Row> rows(cfg.sizes.size() * nh);
    std::mutex log;
    std::size_t done = 0;
    run_jobs(rows.size(), cfg.threads, [&](std::size_t i) {
        const auto size = cfg.sizes[i / nh];
        const double h = cfg.h_grid[i % nh];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto state = obtain_state(cfg, size, h);
            rows[i].state_converged = state.converged;
            rows[i].report = measure(m, state.psi, opts);
        } catch (...) {
            rows[i].error = std::current_exception();
        }
        rows[i].runtime = seconds_since(t0);
        std::lock_guard lock(log);
        err << "[" << ++done << "/" << rows.size() << "] " << cfg.measure << " " << size.str()
            << " h=" << format_number(h) << '\n';
    });

    std::vector<std::string> header{"measure", "size", "h", "value", "chi", "xi", "n_calls", "achieved_error"};
    if (cfg.timing)
        header.push_back("runtime_s");
    CsvTable table(header);
    int code = exit_ok;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].error) {
            code = std::max(code, classify(rows[i].error, err));
            continue;
        }
        const auto& r = rows[i].report;
        if (!r.converged || !rows[i].state_converged) {
            err << "warning: " << cfg.sizes[i / nh].str() << " h=" << format_number(cfg.h_grid[i % nh])
                << (rows[i].state_converged ? " cross interpolation" : " ground state") << " did not converge\n";
            code = std::max(code, static_cast<int>(exit_not_converged));
        }
        std::vector<std::string> cells{cfg.measure,
                                       cfg.sizes[i / nh].str(),
                                       format_number(cfg.h_grid[i % nh]),
                                       format_number(r.value),
                                       std::to_string(r.input_chi),
                                       std::to_string(r.tci_xi),
                                       std::to_string(r.n_calls),
                                       format_number(r.achieved_error)};
        if (cfg.timing)
            cells.push_back(format_number(rows[i].runtime));
        table.add(std::move(cells));
    }
    if (code == exit_invalid_config)
        return code;

    fs::create_directories(cfg.out);
    const auto stem = output_stem(cfg, "");
    table.write(stem + ".csv");
    out << table.str();

    // value against system size at each field, with a straight-line fit
    CsvTable scaling({"h", "sites", "value", "fit_slope", "fit_intercept", "relative_residual"});
    for (std::size_t j = 0; j < nh; ++j) {
        std::vector<double> x, y;
        for (std::size_t s = 0; s < cfg.sizes.size(); ++s)
            if (!rows[s * nh + j].error) {
                x.push_back(static_cast<double>(cfg.sizes[s].sites()));
                y.push_back(rows[s * nh + j].report.value);
            }
        std::optional<LinearFit> fit;
        try {
            fit = linear_fit(x, y);
        } catch (const std::invalid_argument&) {
        }
        for (std::size_t k = 0; k < x.size(); ++k)
            scaling.add({format_number(cfg.h_grid[j]), format_number(x[k]), format_number(y[k]),
                         fit ? format_number(fit->slope) : "nan", fit ? format_number(fit->intercept) : "nan",
                         fit ? format_number(fit->relative_residual) : "nan"});
    }
    scaling.write(stem + "_scaling.csv");

    std::vector<Series> series;
    for (std::size_t s = 0; s < cfg.sizes.size(); ++s) {
        Series line{(cfg.model == "ising1d" ? "L = " : "") + cfg.sizes[s].str(), {}, {}};
        for (std::size_t j = 0; j < nh; ++j)
            if (!rows[s * nh + j].error) {
                line.x.push_back(cfg.h_grid[j]);
                line.y.push_back(rows[s * nh + j].report.value);
            }
        series.push_back(std::move(line));
    }
    std::ofstream svg(stem + ".svg", std::ios::binary);
    svg << line_chart_svg(series, (m == Measure::SRE2 ? "SRE2, " : "REC, ") + cfg.model, "h",
                          m == Measure::SRE2 ? "M2" : "C_r");
    err << "wrote " << stem << ".csv, " << stem << "_scaling.csv, " << stem << ".svg\n";
    return code;
}

// ---------------------------------------------------------------------- verify

inline int cmd_verify(RunConfig cfg, std::ostream& out, std::ostream& err) {
    const Measure m = parse_measure(cfg.measure);
    if (cfg.sizes.empty()) {
        if (cfg.model == "ising2d")
            cfg.sizes = parse_sizes("3x3");
        else
            cfg.sizes = m == Measure::SRE2 ? parse_sizes("4,6,8") : parse_sizes("6,10,14");
    }
    if (cfg.h_grid.empty())
        cfg.h_grid = m == Measure::SRE2 ? parse_h_grid("0.25,0.5,1,2") : parse_h_grid("0.5,1,2");
    validate(cfg);
    const std::size_t cap = m == Measure::SRE2 ? 8 : 14;
    for (const auto& s : cfg.sizes)
        if (s.sites() > cap)
            throw ConfigError("verify supports at most " + std::to_string(cap) + " sites for " + cfg.measure);
    const auto opts = resource_options(cfg, m, 1e-10, m == Measure::SRE2 ? 256 : 128);

    struct Row {
        double tci = 0.0, exact = 0.0;
        std::exception_ptr error;
    };
    const std::size_t nh = cfg.h_grid.size();
    std::vector<Row> rows(cfg.sizes.size() * nh);
    run_jobs(rows.size(), cfg.threads, [&](std::size_t i) {
        const auto size = cfg.sizes[i / nh];
        const double h = cfg.h_grid[i % nh];
        try {
            const auto model = make_model(cfg, size, h);
            DenseTensor dense;
            if (resolve_solver(cfg, size) == "ghz-analytic")
                dense = to_dense(make_ghz_mps(model.n_sites()));
            else
                dense = ed_ground_state(model).state;
            const auto psi = mps_from_dense(dense, unbounded, 1e-14);
            rows[i].tci = measure(m, psi, opts).value;
            rows[i].exact = m == Measure::SRE2 ? sre2_bruteforce(dense) : rec_bruteforce(dense);
        } catch (...) {
            rows[i].error = std::current_exception();
        }
    });

    CsvTable table({"measure", "size", "h", "tci", "bruteforce", "deviation", "status"});
    double worst = 0.0;
    int code = exit_ok;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].error) {
            code = std::max(code, classify(rows[i].error, err));
            continue;
        }
        const double dev = std::abs(rows[i].tci - rows[i].exact);
        worst = std::max(worst, dev);
        const bool ok = dev <= cfg.verify_tol;
        if (!ok) {
            code = std::max(code, static_cast<int>(exit_verify_failed));
            err << "FAIL " << cfg.sizes[i / nh].str() << " h=" << format_number(cfg.h_grid[i % nh])
                << " deviation " << format_number(dev) << '\n';
        }
        table.add({cfg.measure, cfg.sizes[i / nh].str(), format_number(cfg.h_grid[i % nh]), format_number(rows[i].tci),
                   format_number(rows[i].exact), format_number(dev), ok ? "pass" : "fail"});
    }
    fs::create_directories(cfg.out);
    table.write(output_stem(cfg, "verify_") + ".csv");
    out << table.str();
    out << "max deviation: " << format_number(worst) << " (tolerance " << format_number(cfg.verify_tol) << ")\n";
    return code;
}

// ----------------------------------------------------------------------- bench

struct LatencySummary {
    double mean = 0.0, p50 = 0.0, p90 = 0.0, p99 = 0.0; ///< microseconds
};

inline LatencySummary summarize(std::vector<double> us) {
    LatencySummary s;
    if (us.empty())
        return s;
    std::sort(us.begin(), us.end());
    double total = 0.0;
    for (double v : us)
        total += v;
    s.mean = total / static_cast<double>(us.size());
    auto pct = [&](double p) { return us[std::min(us.size() - 1, static_cast<std::size_t>(p * static_cast<double>(us.size())))]; };
    s.p50 = pct(0.5);
    s.p90 = pct(0.9);
    s.p99 = pct(0.99);
    return s;
}

struct TimedRun {
    ResourceReport report;
    std::vector<double> latency_us;
};

/// Same pipeline as sre2/rec with every black-box call timed.
inline TimedRun timed_measure(Measure m, const MatrixProductState& psi, const ResourceOptions& opts) {
    auto box = m == Measure::SRE2 ? sre2_function(psi, opts.use_cache) : rec_function(psi, opts.use_cache);
    TimedRun run;
    std::mutex mu;
    BlackBoxTensor timed(box.tensor.degree(), box.tensor.local_dim(), [&](std::span<const int> idx) {
        const auto t0 = std::chrono::steady_clock::now();
        const double v = box.tensor(idx);
        const double us = seconds_since(t0) * 1e6;
        std::lock_guard lock(mu);
        run.latency_us.push_back(us);
        return v;
    });
    const std::size_t n = psi.size();
    std::vector<MultiIndex> seeds;
    if (m == Measure::SRE2) {
        seeds = {MultiIndex(n, 0), MultiIndex(n, 1)};
    } else {
        seeds = {dominant_configuration(psi)};
        seeds.push_back(seeds.front());
        for (auto& s : seeds.back())
            s ^= 1;
    }
    TciOptions t;
    t.tol = opts.tol;
    t.max_bond = opts.max_bond;
    t.max_sweeps = opts.max_sweeps;
    const auto res = tci_run(timed, t, std::span<const MultiIndex>(seeds));
    run.report.measure = m;
    run.report.n_calls = res.diagnostics.n_calls;
    run.report.tci_xi = res.diagnostics.max_rank();
    run.report.converged = res.diagnostics.converged;
    run.report.input_chi = psi.max_bond();
    const double total = sum_all(res.tt).real();
    run.report.value = m == Measure::SRE2 ? -std::log2(total / std::ldexp(1.0, static_cast<int>(n))) : -total;
    return run;
}

inline int cmd_bench(RunConfig cfg, std::ostream& out, std::ostream& err) {
    if (cfg.sizes.empty())
        cfg.sizes = cfg.model == "ising1d" ? parse_sizes("16,32,64") : parse_sizes("3x3,4x4");
    if (cfg.h_grid.empty())
        cfg.h_grid = {1.0};
    validate(cfg);
    const Measure m = parse_measure(cfg.measure);
    const std::size_t d = m == Measure::SRE2 ? 4 : 2;
    const double h = cfg.h_grid.front();
    auto opts = resource_options(cfg, m, 1e-8, 16);
    const std::size_t xi_fixed = opts.max_bond;

    CsvTable table({"sweep", "size", "sites", "xi_max", "xi", "n_calls", "budget", "within_budget", "converged"});
    bool budget_ok = true;
    auto add_row = [&](const char* sweep, LatticeSize size, std::size_t xi_cap, const ResourceReport& r) {
        const double budget = 10.0 * static_cast<double>(size.sites() * d) * static_cast<double>(r.tci_xi * r.tci_xi);
        const bool ok = static_cast<double>(r.n_calls) <= budget;
        budget_ok = budget_ok && ok;
        table.add({sweep, size.str(), std::to_string(size.sites()), std::to_string(xi_cap), std::to_string(r.tci_xi),
                   std::to_string(r.n_calls), format_number(budget), ok ? "yes" : "no", r.converged ? "yes" : "no"});
    };

    std::vector<double> log_sites, log_calls;
    std::vector<MatrixProductState> states;
    for (const auto& size : cfg.sizes) {
        states.push_back(obtain_state(cfg, size, h).psi);
        const auto r = measure(m, states.back(), opts);
        add_row("size", size, xi_fixed, r);
        log_sites.push_back(std::log(static_cast<double>(size.sites())));
        log_calls.push_back(std::log(static_cast<double>(r.n_calls)));
        err << "bench " << size.str() << " n_calls=" << r.n_calls << '\n';
    }
    for (std::size_t xi : {std::size_t{2}, std::size_t{4}, std::size_t{8}, std::size_t{16}, std::size_t{32}}) {
        auto o = opts;
        o.max_bond = xi;
        add_row("xi", cfg.sizes.front(), xi, measure(m, states.front(), o));
    }

    // latency of individual calls along one TCI run, cache on and off
    auto on = opts;
    auto off = opts;
    off.use_cache = false;
    const auto with_cache = timed_measure(m, states.back(), on);
    const auto without = timed_measure(m, states.back(), off);
    const auto a = summarize(with_cache.latency_us), b = summarize(without.latency_us);
    CsvTable latency({"cache", "calls", "mean_us", "p50_us", "p90_us", "p99_us", "value"});
    latency.add({"on", std::to_string(with_cache.latency_us.size()), format_number(a.mean), format_number(a.p50),
                 format_number(a.p90), format_number(a.p99), format_number(with_cache.report.value)});
    latency.add({"off", std::to_string(without.latency_us.size()), format_number(b.mean), format_number(b.p50),
                 format_number(b.p90), format_number(b.p99), format_number(without.report.value)});

    fs::create_directories(cfg.out);
    const auto stem = output_stem(cfg, "bench_");
    table.write(stem + ".csv");
    latency.write(stem + "_latency.csv");
    out << table.str() << '\n' << latency.str();

    int code = exit_ok;
    if (log_sites.size() >= 2 && log_sites.front() != log_sites.back()) {
        const auto fit = linear_fit(log_sites, log_calls);
        out << "n_calls ~ sites^" << format_number(fit.slope) << " at xi_max = " << xi_fixed << '\n';
        if (!(fit.slope < 2.0)) {
            err << "FAIL call growth in system size is not sub-quadratic\n";
            code = exit_verify_failed;
        }
    }
    if (!budget_ok) {
        err << "FAIL call budget 10 L d xi^2 exceeded\n";
        code = exit_verify_failed;
    }
    if (std::abs(with_cache.report.value - without.report.value) > 1e-12) {
        err << "FAIL cached and uncached values differ\n";
        code = exit_verify_failed;
    }
    return code;
}

// ------------------------------------------------------------------------ main

/// Parses argv and runs one subcommand; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Quantum resources of Ising ground states by tensor cross interpolation"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print this help and exit"); // -h would clash with --h

    struct Flags {
        std::optional<std::string> config, model, sizes, h, measure, solver, out;
        std::optional<std::size_t> chi, xi, threads;
        std::optional<double> tol;
        std::optional<std::uint64_t> seed;
        bool no_build = false, open = false, timing = false;
    } flags;

    auto add_flags = [&flags](CLI::App* sub) {
        sub->add_option("--config", flags.config, "key = value config file; flags win");
        sub->add_option("--model", flags.model, "ising1d or ising2d");
        sub->add_option("--sizes", flags.sizes, "chain lengths 4,6,8 or grids 3x3,3x4");
        sub->add_option("--h", flags.h, "field values 0.5,1,2 or start:stop:step");
        sub->add_option("--measure", flags.measure, "sre2 or rec");
        sub->add_option("--chi", flags.chi, "maximum bond dimension of the ground state");
        sub->add_option("--xi", flags.xi, "maximum bond dimension of the interpolation");
        sub->add_option("--tol", flags.tol, "relative interpolation tolerance");
        sub->add_option("--solver", flags.solver, "auto, ed, dmrg or ghz-analytic");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--seed", flags.seed, "random seed");
        sub->add_flag("--no-build", flags.no_build, "fail instead of computing missing ground states");
        sub->add_option("--threads", flags.threads, "parallel sweep points");
        sub->add_flag("--open", flags.open, "open instead of periodic boundaries");
        sub->add_flag("--timing", flags.timing, "add a runtime_s column to measure output");
    };
    auto* gs = app.add_subcommand("ground-state", "compute and cache ground states");
    auto* ms = app.add_subcommand("measure", "SRE2 or REC over sizes and fields");
    auto* vf = app.add_subcommand("verify", "compare against exhaustive enumeration");
    auto* bn = app.add_subcommand("bench", "call counts and latency");
    for (auto* sub : {gs, ms, vf, bn})
        add_flags(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? exit_ok : exit_invalid_config;
    }

    try {
        RunConfig cfg;
        if (flags.config)
            load_config_file(cfg, *flags.config);
        if (flags.model)
            cfg.model = *flags.model;
        if (flags.sizes)
            cfg.sizes = parse_sizes(*flags.sizes);
        if (flags.h)
            cfg.h_grid = parse_h_grid(*flags.h);
        if (flags.measure)
            cfg.measure = *flags.measure;
        if (flags.solver)
            cfg.solver = *flags.solver;
        if (flags.out)
            cfg.out = *flags.out;
        if (flags.chi)
            cfg.chi = *flags.chi;
        if (flags.xi)
            cfg.xi = *flags.xi;
        if (flags.tol)
            cfg.tol = *flags.tol;
        if (flags.seed)
            cfg.seed = *flags.seed;
        if (flags.threads)
            cfg.threads = *flags.threads;
        if (flags.no_build)
            cfg.no_build = true;
        if (flags.open)
            cfg.periodic = false;
        if (flags.timing)
            cfg.timing = true;

        if (gs->parsed())
            return cmd_ground_state(cfg, out, err);
        if (ms->parsed())
            return cmd_measure(cfg, out, err);
        if (vf->parsed())
            return cmd_verify(cfg, out, err);
        return cmd_bench(cfg, out, err);
    } catch (...) {
        return classify(std::current_exception(), err);
    }
}

} // namespace qres::cli
