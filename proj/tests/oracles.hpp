// Independent reference computations for the test suites. Nothing in here
// calls into the library's numeric paths.
#ifndef QRWR_TESTS_ORACLES_HPP
#define QRWR_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

/// (1/sqrt(pi)) * integral_y^inf exp(-t^2) dt = erfc(y)/2, by composite
/// Simpson on [y, y + 12] (the remainder is below 1e-60).
inline double gaussian_tail_half_erfc(double y, int panels = 200000) {
    const double a = y;
    const double b = y + 12.0;
    const double h = (b - a) / panels;
    auto f = [](double t) { return std::exp(-t * t); };
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0 * std::numbers::inv_sqrtpi;
}

/// P_err for a given SNR via the quadrature above.
inline double p_err_by_quadrature(double snr) { return gaussian_tail_half_erfc(std::sqrt(snr / 8.0)); }

/// Root of a decreasing function f(x) = target on [lo, hi] by plain bisection.
inline double bisect_decreasing(const std::function<double(double)>& f, double target, double lo, double hi,
                                int iters = 200) {
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// SNR whose erfc error equals p, found by bisection on std::erfc.
inline double snr_by_bisection(double p) {
    return bisect_decreasing([](double s) { return 0.5 * std::erfc(std::sqrt(s / 8.0)); }, p, 0.0, 8000.0);
}

/// Least-squares slope of y on x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Log-uniform draw on [lo, hi].
inline double log_uniform(std::mt19937_64& g, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(g));
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace oracle

#endif  // QRWR_TESTS_ORACLES_HPP
