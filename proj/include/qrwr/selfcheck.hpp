#ifndef QRWR_SELFCHECK_HPP
#define QRWR_SELFCHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>
#include <random>
#include <string>
#include <vector>

#include "qrwr/background.hpp"
#include "qrwr/constants.hpp"
#include "qrwr/detection.hpp"
#include "qrwr/linkbudget.hpp"
#include "qrwr/mc_oracle.hpp"
#include "qrwr/sweep.hpp"

namespace qrwr {

struct CheckResult {
    int id;
    std::string name;
    bool pass;
    std::string detail;
};

namespace detail {

inline std::string fmt(const char* f, double a) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

inline std::string fmt(const char* f, double a, double b) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

inline std::vector<double> selfcheck_ranges() {
    std::vector<double> r;
    for (int km = 25; km <= 200; km += 5) r.push_back(km);
    return r;
}

inline CheckResult check_geometric_return() {
    const double a = geometric_return(2.0, 25e3);
    const double b = geometric_return(2.0, 200e3);
    const bool pass = std::abs(a - 2.546e-10) <= 0.0005e-10 && std::abs(b - 3.979e-12) <= 0.0005e-12 &&
                      std::abs(a / 2.5e-10 - 1.0) <= 0.02 && std::abs(b / 4.0e-12 - 1.0) <= 0.02;
    return {1, "geometric return at 25 and 200 km", pass, fmt("eta_x = %.4e, %.4e", a, b)};
}

inline CheckResult check_atmosphere_anchors() {
    const bool pass = atmosphere_attenuation(25.0, Weather::Good) == 0.98 &&
                      atmosphere_attenuation(200.0, Weather::Good) == 0.82 &&
                      atmosphere_attenuation(25.0, Weather::Bad) == 0.50 &&
                      atmosphere_attenuation(200.0, Weather::Bad) == 0.004;
    return {2, "atmosphere anchors exact", pass, "good 0.98/0.82, bad 0.50/0.004"};
}

inline CheckResult check_aperture() {
    const double v = aperture_fraction(0.01, 2.0);
    return {3, "aperture fraction 0.01 m^2 / 2 m^2", v == 0.005, fmt("eta_da = %.17g", v)};
}

inline CheckResult check_ratio_span() {
    const LinkParameters p;
    double lo = 1.0;
    double hi = 0.0;
    for (Weather w : {Weather::Good, Weather::Bad})
        for (double r : selfcheck_ranges()) {
            const double ratio = compose_efficiencies(link_factors(r, w, p)).ratio;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    const bool pass = hi >= 5e-8 / 3.0 && hi <= 5e-8 * 3.0 && lo >= 3e-12 / 3.0 && lo <= 3e-12 * 3.0;
    return {4, "link-budget ratio span", pass, fmt("ratio in [%.4e, %.4e]", lo, hi)};
}

inline CheckResult check_background_magnitude() {
    const double mw = planck_occupancy(constants::microwave_reference_hz, constants::solar_temperature_k);
    const double opt = planck_occupancy(constants::optical_reference_hz, constants::solar_temperature_k);
    const double ratio = mw / opt;
    const bool pass = mw >= 1e4 && mw <= 2e4 && ratio >= 1e5 && ratio <= 1e7;
    return {5, "background occupancy magnitude", pass, fmt("occupancy %.6g, microwave/optical %.6g", mw, ratio)};
}

inline CheckResult check_erfc_pipeline() {
    const double p8 = error_probability(8.0);
    const double s = required_snr(constants::two_sigma_p_err);
    std::mt19937_64 g(6);
    std::uniform_real_distribution<double> u(std::log(1e-12), std::log(0.49));
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double p = std::exp(u(g));
        worst = std::max(worst, std::abs(error_probability(required_snr(p)) - p) / p);
    }
    const bool pass = std::abs(p8 - 0.078649) <= 1e-6 && std::abs(s - 11.38) <= 0.02 && worst <= 1e-8;
    char buf[200];
    std::snprintf(buf, sizeof buf, "p_err(8) = %.7f, required_snr(0.0455) = %.5f (want 11.38 +/- 0.02), round trip %.2e",
                  p8, s, worst);
    return {6, "erfc pipeline", pass, buf};
}

inline std::vector<ScenarioLine> scenario_lines(Protocol protocol) {
    const auto ranges = selfcheck_ranges();
    std::vector<ScenarioLine> lines;
    for (Weather w : {Weather::Good, Weather::Bad})
        lines.push_back(scenario_line(ranges, w, LinkParameters{}, RadiationBackground::with_total(1e4), protocol,
                                      SignalModel{}));
    return lines;
}

inline CheckResult check_gs_regime() {
    double lo = INFINITY;
    for (const auto& line : scenario_lines(Protocol::QiGaussian))
        for (const auto& p : line.points) lo = std::min(lo, p.rm.rm);
    return {7, "GS scenario: R_M > 1 everywhere", lo > 1.0, fmt("min R_M = %.4g", lo)};
}

inline CheckResult check_sp_regime() {
    double hi = 0.0;
    for (const auto& line : scenario_lines(Protocol::QiSinglePhoton))
        for (const auto& p : line.points) hi = std::max(hi, p.rm.rm);
    return {8, "SP scenario: R_M < 1e-3 everywhere", hi < 1e-3, fmt("max R_M = %.4g", hi)};
}

inline CheckResult check_quadratic_cost() {
    const ChannelParams c{.eta = 1e-3, .eta_anc = 1.0, .signal = SignalModel{}, .var_bg = 1e4};
    std::vector<double> x, y;
    for (int i = 0; i <= 50; ++i) {
        const double p = std::pow(10.0, -6.0 + 5.0 * i / 50.0);
        x.push_back(std::log(required_trials(Protocol::QiGaussian, p, c)));
        y.push_back(std::log(required_trials(Protocol::TargetDirect, p, c)));
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {9, "quadratic cost law", std::abs(slope - 2.0) <= 0.01, fmt("slope = %.6f", slope)};
}

inline CheckResult check_monte_carlo() {
    McConfig cfg;
    cfg.seed = 20240611;
    cfg.shots = 100000;
    cfg.background = RadiationBackground::with_total(1e6, 1, VarianceModel::Poisson);
    const std::vector<double> grid{1.0, 4.0, 8.0, 16.0};
    const auto a = validate_erfc(grid, cfg);
    const auto b = validate_erfc(grid, cfg);
    double worst = 0.0;
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i].z_score));
        same = same && a[i].empirical_p_err.value == b[i].empirical_p_err.value && a[i].z_score == b[i].z_score;
    }
    return {10, "Monte Carlo against the erfc map", worst < 4.0 && same,
            fmt("max |z| = %.3f over SNR {1,4,8,16}, repeat identical = %g", worst, same ? 1.0 : 0.0)};
}

inline CheckResult check_invariance() {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::uniform_real_distribution<double> range(5.0, 300.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Weather w = i % 2 ? Weather::Good : Weather::Bad;
        const double r = range(g);
        const auto bg = RadiationBackground::with_total(std::exp(std::uniform_real_distribution<double>(0, 20)(g)));
        const SignalModel s{std::exp(std::uniform_real_distribution<double>(-12, 0)(g)), 100};
        for (Protocol proto : {Protocol::QiGaussian, Protocol::QiSinglePhoton}) {
            LinkParameters a;
            a.eta_det = u(g);
            LinkParameters b = a;
            b.eta_det = u(g);
            auto rm = [&](const LinkParameters& lp) {
                const auto c = compose_efficiencies(link_factors(r, w, lp));
                return rm_ratio(proto, 0.0455, EfficiencyTriple{c.eta_t, c.eta_r, c.eta_anc}, s, bg).rm;
            };
            const double x = rm(a);
            const double y = rm(b);
            worst = std::max(worst, std::abs(x - y) / std::max(x, y));
        }
    }
    const ChannelParams same{.eta = 0.3, .eta_anc = 1.0, .signal = SignalModel{}, .var_bg = 50.0};
    const double sym = rm_ratio(Protocol::TargetDirect, 0.0455, same, same).rm;
    const bool pass = worst <= 1e-10 && std::abs(sym - 1.0) <= 1e-10;
    return {11, "detector-efficiency invariance and rm = 1 symmetry", pass,
            fmt("max relative change %.2e, symmetric rm = %.17g", worst, sym)};
}

// Beyond the acceptance list.

inline CheckResult check_contour() {
    SweepSpec s;
    s.x = Axis{"n_s", 1e-4, 10.0, 21};
    s.y = Axis{"eta_ratio", 1e-8, 1.0, 33};
    s.fixed.radar_protocol = Protocol::QiSinglePhoton;
    s.fixed.background = RadiationBackground::with_total(1e4);
    const auto c = contour_rm_unity(s);
    double worst = 0.0;
    for (const auto& p : c.points) worst = std::max(worst, std::abs(std::log10(node_point(s, p.x, p.y).rm().rm)));
    return {12, "R_M = 1 contour lies on the level set", !c.points.empty() && worst < 1e-6,
            fmt("%g points, max |log10 R_M| = %.2e", static_cast<double>(c.points.size()), worst)};
}

inline CheckResult check_sweep_determinism() {
    SweepSpec s;
    s.x = Axis{"n_b", 1.0, 1e8, 9};
    s.y = Axis{"eta_ratio", 1e-12, 1.0, 13};
    const auto a = sweep_grid(s, 1);
    const auto b = sweep_grid(s, 3);
    return {13, "sweep independent of worker count", a.grid == b.grid && a.scenario_hash == b.scenario_hash,
            "1 vs 3 workers"};
}

}  // namespace detail

/// Runs every check. `with_monte_carlo = false` skips the slow one (10).
inline std::vector<CheckResult> run_selfcheck(bool with_monte_carlo = true) {
    using Fn = CheckResult (*)();
    static constexpr std::pair<int, Fn> checks[] = {
        {1, detail::check_geometric_return}, {2, detail::check_atmosphere_anchors},
        {3, detail::check_aperture},         {4, detail::check_ratio_span},
        {5, detail::check_background_magnitude}, {6, detail::check_erfc_pipeline},
        {7, detail::check_gs_regime},        {8, detail::check_sp_regime},
        {9, detail::check_quadratic_cost},   {10, detail::check_monte_carlo},
        {11, detail::check_invariance},      {12, detail::check_contour},
        {13, detail::check_sweep_determinism},
    };
    std::vector<CheckResult> out;
    for (const auto& [id, run] : checks) {
        if (!with_monte_carlo && id == 10) continue;
        try {
            out.push_back(run());
        } catch (const std::exception& e) {
            out.push_back({id, "check threw", false, e.what()});
        }
    }
    return out;
}

}  // namespace qrwr

#endif  // QRWR_SELFCHECK_HPP
