#ifndef QRWR_CONTOUR_HPP
#define QRWR_CONTOUR_HPP

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace qrwr {

/// Level-crossing search along one grid line.
///
/// `residual(y)` returns the signed distance from the level (for R_M = 1 it is
/// log10 R_M) or nullopt where the model is infeasible. Every sign change
/// between consecutive feasible grid nodes is refined by bisection, in log y
/// when `log_axis` is set, until |residual| < tol. A node that sits exactly
/// on the level is reported as is. Feasibility gaps break brackets.
template <class Residual>
std::vector<double> find_level_crossings(Residual&& residual, std::span<const double> ys, bool log_axis,
                                         double tol = 1e-6, int max_iter = 300) {
    std::vector<double> roots;
    if (ys.empty()) return roots;

    auto to_u = [&](double y) { return log_axis ? std::log(y) : y; };
    auto from_u = [&](double u) { return log_axis ? std::exp(u) : u; };

    std::optional<double> prev = residual(ys[0]);
    if (prev && *prev == 0.0) roots.push_back(ys[0]);

    for (std::size_t j = 1; j < ys.size(); ++j) {
        const std::optional<double> cur = residual(ys[j]);
        if (cur && *cur == 0.0) roots.push_back(ys[j]);

        if (prev && cur && *prev != 0.0 && *cur != 0.0 && std::signbit(*prev) != std::signbit(*cur)) {
            double lo = to_u(ys[j - 1]);
            double hi = to_u(ys[j]);
            double f_lo = *prev;
            double best = from_u(0.5 * (lo + hi));
            double best_abs = INFINITY;
            for (int it = 0; it < max_iter; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double y = from_u(mid);
                const std::optional<double> f = residual(y);
                if (!f) break;
                if (std::abs(*f) < best_abs) {
                    best_abs = std::abs(*f);
                    best = y;
                }
                if (std::abs(*f) < tol || mid == lo || mid == hi) break;
                if (std::signbit(*f) == std::signbit(f_lo)) {
                    lo = mid;
                    f_lo = *f;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(best);
        }
        prev = cur;
    }
    return roots;
}

}  // namespace qrwr

#endif  // QRWR_CONTOUR_HPP
