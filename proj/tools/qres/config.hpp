#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qres::cli {

/// Bad user input; maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LatticeSize {
    std::size_t width = 0, height = 1; ///< height 1 means a chain

    std::size_t sites() const { return width * height; }
    std::string str() const {
        return height == 1 ? std::to_string(width) : std::to_string(width) + "x" + std::to_string(height);
    }
    friend bool operator==(const LatticeSize&, const LatticeSize&) = default;
};

struct RunConfig {
    std::string model = "ising1d";  // ising1d | ising2d
    std::vector<LatticeSize> sizes;
    std::vector<double> h_grid;
    std::string solver = "auto";    // auto | ed | dmrg | ghz-analytic
    std::string measure = "sre2";   // sre2 | rec
    std::size_t chi = 64;
    std::size_t xi = 0;             // 0: per-command default
    double tol = 0.0;               // 0: per-command default
    std::string out = "qres_out";
    std::uint64_t seed = 0;
    bool no_build = false;
    std::size_t threads = 1;
    bool periodic = true;
    bool timing = false;
    double verify_tol = 1e-6;
};

namespace detail {

inline std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

inline double to_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v))
        throw ConfigError("invalid number for " + what + ": '" + text + "'");
    return v;
}

inline std::uint64_t to_unsigned(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("invalid integer for " + what + ": '" + text + "'");
    return v;
}

inline bool to_bool(const std::string& text, const std::string& what) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "1" || t == "true" || t == "yes" || t == "on")
        return true;
    if (t == "0" || t == "false" || t == "no" || t == "off")
        return false;
    throw ConfigError("invalid boolean for " + what + ": '" + text + "'");
}

} // namespace detail

/// "4,6,8" or "3x3,3x4".
inline std::vector<LatticeSize> parse_sizes(const std::string& text) {
    std::vector<LatticeSize> out;
    for (const auto& item : detail::split(text, ',')) {
        LatticeSize s;
        if (const auto x = item.find_first_of("xX"); x != std::string::npos) {
            s.width = detail::to_unsigned(detail::trim(item.substr(0, x)), "sizes");
            s.height = detail::to_unsigned(detail::trim(item.substr(x + 1)), "sizes");
        } else {
            s.width = detail::to_unsigned(item, "sizes");
        }
        if (s.width == 0 || s.height == 0)
            throw ConfigError("sizes must be positive: '" + item + "'");
        out.push_back(s);
    }
    if (out.empty())
        throw ConfigError("empty size list");
    return out;
}

/// "0.1,0.5,1" or "start:stop:step" (stop included within half a step).
inline std::vector<double> parse_h_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto parts = detail::split(text, ':');
        if (parts.size() != 3)
            throw ConfigError("h range must be start:stop:step");
        const double a = detail::to_double(parts[0], "h"), b = detail::to_double(parts[1], "h"),
                     step = detail::to_double(parts[2], "h");
        if (!(step > 0.0) || b < a)
            throw ConfigError("h range needs start <= stop and a positive step");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 0.5));
        if (n > 100000)
            throw ConfigError("h range has too many points");
        for (std::size_t k = 0; k <= n; ++k)
            out.push_back(a + static_cast<double>(k) * step);
    } else {
        for (const auto& item : detail::split(text, ','))
            out.push_back(detail::to_double(item, "h"));
    }
    if (out.empty())
        throw ConfigError("empty h grid");
    for (double h : out)
        if (h < 0.0)
            throw ConfigError("h values must be nonnegative");
    return out;
}

/// Applies one key = value setting.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "model")
        cfg.model = value;
    else if (key == "sizes")
        cfg.sizes = parse_sizes(value);
    else if (key == "h")
        cfg.h_grid = parse_h_grid(value);
    else if (key == "solver")
        cfg.solver = value;
    else if (key == "measure")
        cfg.measure = value;
    else if (key == "chi")
        cfg.chi = detail::to_unsigned(value, key);
    else if (key == "xi")
        cfg.xi = detail::to_unsigned(value, key);
    else if (key == "tol")
        cfg.tol = detail::to_double(value, key);
    else if (key == "out")
        cfg.out = value;
    else if (key == "seed")
        cfg.seed = detail::to_unsigned(value, key);
    else if (key == "no_build" || key == "no-build")
        cfg.no_build = detail::to_bool(value, key);
    else if (key == "threads")
        cfg.threads = detail::to_unsigned(value, key);
    else if (key == "periodic")
        cfg.periodic = detail::to_bool(value, key);
    else if (key == "timing")
        cfg.timing = detail::to_bool(value, key);
    else if (key == "verify_tol")
        cfg.verify_tol = detail::to_double(value, key);
    else
        throw ConfigError("unknown config key '" + key + "'");
}

/// Flat key = value lines; [section] headers only group keys. '#' and ';' start comments.
inline std::map<std::string, std::string> read_config_text(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto c = line.find_first_of("#;"); c != std::string::npos)
            line.erase(c);
        line = detail::trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(number) + ": malformed section header");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError("line " + std::to_string(number) + ": empty key");
        out[key] = detail::trim(line.substr(eq + 1));
    }
    return out;
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    for (const auto& [key, value] : read_config_text(in))
        apply_setting(cfg, key, value);
}

inline void validate(const RunConfig& cfg) {
    if (cfg.model != "ising1d" && cfg.model != "ising2d")
        throw ConfigError("model must be ising1d or ising2d");
    if (cfg.measure != "sre2" && cfg.measure != "rec")
        throw ConfigError("measure must be sre2 or rec");
    if (cfg.solver != "auto" && cfg.solver != "ed" && cfg.solver != "dmrg" && cfg.solver != "ghz-analytic")
        throw ConfigError("solver must be auto, ed, dmrg or ghz-analytic");
    for (const auto& s : cfg.sizes) {
        if (cfg.model == "ising1d" && s.height != 1)
            throw ConfigError("ising1d takes chain lengths, got " + s.str());
        if (cfg.model == "ising2d" && s.height == 1)
            throw ConfigError("ising2d takes WxH sizes, got " + s.str());
        if (s.sites() < 2)
            throw ConfigError("systems need at least two sites");
        if (s.sites() > 255)
            throw ConfigError("systems are limited to 255 sites");
    }
    if (cfg.chi == 0)
        throw ConfigError("chi must be positive");
    if (cfg.tol < 0.0 || cfg.verify_tol < 0.0)
        throw ConfigError("tolerances must be nonnegative");
    if (cfg.threads == 0)
        throw ConfigError("threads must be positive");
    if (cfg.solver == "ghz-analytic")
        for (double h : cfg.h_grid)
            if (h != 0.0)
                throw ConfigError("ghz-analytic is the h = 0 state only");
}

} // namespace qres::cli
