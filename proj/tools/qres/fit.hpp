#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qres::cli {

struct LinearFit {
    double slope = 0.0, intercept = 0.0;
    double relative_residual = 0.0; ///< max |y - fit| / |y|
};

/// Least-squares line through (x, y).
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit: need at least two matching points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("linear_fit: x values are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = std::abs(y[k] - (f.intercept + f.slope * x[k]));
        f.relative_residual = std::max(f.relative_residual, y[k] != 0.0 ? r / std::abs(y[k]) : r);
    }
    return f;
}

} // namespace qres::cli
