#ifndef QRWR_DETECTION_HPP
#define QRWR_DETECTION_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "qrwr/background.hpp"
#include "qrwr/errors.hpp"

namespace qrwr {

// ---------------------------------------------------------------------------
// SNR -> error probability for two equally likely hypotheses

/// P_err = erfc(sqrt(SNR / 8)) / 2. Strictly decreasing, 0.5 at SNR = 0.
inline double error_probability(double snr) {
    detail::require(snr >= 0.0 && !std::isnan(snr), "error_probability: snr must be >= 0");
    return 0.5 * std::erfc(std::sqrt(snr / 8.0));
}

namespace detail {

// ln erfc(y) for y >= 0, accurate near y = 0 where erfc(y) ~ 1.
inline double log_erfc(double y) {
    if (y < 0.5) return std::log1p(-std::erf(y));
    return std::log(std::erfc(y));
}

// d/dy ln erfc(y) = -2 exp(-y^2) / (sqrt(pi) erfc(y)).
inline double log_erfc_slope(double y) {
    const double e = std::erfc(y);
    if (e == 0.0) return -2.0 * y;  // asymptotic slope
    return -2.0 * std::numbers::inv_sqrtpi * std::exp(-y * y) / e;
}

}  // namespace detail

/// Inverse of error_probability: SNR = 8 (erfc^-1(2 p))^2.
///
/// Solves ln erfc(y) = ln(2p) for y = sqrt(SNR/8) with Newton steps kept
/// inside a shrinking bracket; bisection takes over whenever a step would
/// leave it. Converges to relative 1e-12 or better.
inline double required_snr(double p_err) {
    detail::require(p_err > 0.0 && p_err < 0.5, "required_snr: p_err must lie in (0, 0.5)");
    // ln(2p); 2p - 1 is exact for p >= 0.25, where log1p keeps the digits.
    const double target = p_err >= 0.25 ? std::log1p(2.0 * p_err - 1.0) : std::log(2.0 * p_err);

    auto g = [&](double y) { return detail::log_erfc(y) - target; };

    double lo = 0.0;  // g(lo) > 0
    double hi = 1.0;
    while (g(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 64.0) throw DomainError("required_snr: p_err too small to invert");
    }

    double y = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double gy = g(y);
        if (gy == 0.0) break;
        if (gy > 0.0) lo = y; else hi = y;

        const double slope = detail::log_erfc_slope(y);
        double next = y - gy / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);

        const double step = std::abs(next - y);
        y = next;
        if (step <= 1e-15 * y || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }
    return 8.0 * y * y;
}

// ---------------------------------------------------------------------------
// Signal, protocols, SNR models

/// mu photons per mode over M modes; <N_S> = M mu.
struct SignalModel {
    double mu = 1.0e-4;
    long modes = 100;

    double total() const { return mu * static_cast<double>(modes); }

    void validate() const {
        detail::require(mu >= 0.0 && std::isfinite(mu), "signal: mu must be >= 0");
        detail::require(modes >= 1, "signal: modes must be >= 1");
    }

    bool operator==(const SignalModel&) const = default;
};

enum class Protocol { TargetDirect, QiSinglePhoton, QiGaussian };

inline std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::TargetDirect: return "target";
        case Protocol::QiSinglePhoton: return "sp";
        case Protocol::QiGaussian: return "gs";
    }
    return "?";
}

enum class SnrForm { Approximate, Exact };

inline std::string_view to_string(SnrForm f) { return f == SnrForm::Exact ? "exact" : "approximate"; }

/// Direct photon counting at the target:
///   exact        sqrt(K) eta_T N_S / sqrt(var_S + 2 var_B)
///   approximate  sqrt(K) eta_T N_S / sqrt(2 var_B)
/// var_signal defaults to the Poisson value eta_T N_S.
inline double snr_target(double trials, double eta_t, const SignalModel& signal, double var_bg,
                         SnrForm form = SnrForm::Approximate, std::optional<double> var_signal = std::nullopt) {
    detail::require(trials >= 0.0, "snr_target: trial count must be >= 0");
    detail::require(eta_t >= 0.0, "snr_target: efficiency must be >= 0");
    detail::require(var_bg >= 0.0, "snr_target: background variance must be >= 0");
    signal.validate();
    const double n_s = signal.total();
    const double numerator = std::sqrt(trials) * eta_t * n_s;
    if (numerator == 0.0) return 0.0;

    double denom_sq = 2.0 * var_bg;
    if (form == SnrForm::Exact) {
        const double vs = var_signal.value_or(eta_t * n_s);
        detail::require(vs >= 0.0, "snr_target: signal variance must be >= 0");
        denom_sq += vs;
    }
    if (denom_sq <= 0.0) throw DomainError("snr_target: zero noise variance with nonzero signal is singular");
    return numerator / std::sqrt(denom_sq);
}

/// Single-photon QI, covariance of signal and ancilla counts:
///   sqrt(K) sqrt(eta_R eta_anc N_S) / sqrt(2 var_B)
inline double snr_sp(double trials, double eta_r, double eta_anc, const SignalModel& signal, double var_bg) {
    detail::require(trials >= 0.0, "snr_sp: trial count must be >= 0");
    detail::require(eta_r >= 0.0 && eta_anc >= 0.0, "snr_sp: efficiencies must be >= 0");
    detail::require(var_bg >= 0.0, "snr_sp: background variance must be >= 0");
    signal.validate();
    const double numerator = std::sqrt(trials) * std::sqrt(eta_r * eta_anc * signal.total());
    if (numerator == 0.0) return 0.0;
    if (var_bg == 0.0) throw DomainError("snr_sp: zero background variance with nonzero signal is singular");
    return numerator / std::sqrt(2.0 * var_bg);
}

/// Gaussian-state QI with a phase-conjugate receiver:
///   K eta_R eta_anc N_S / (2 sqrt(var_B))
inline double snr_gs(double trials, double eta_r, double eta_anc, const SignalModel& signal, double var_bg) {
    detail::require(trials >= 0.0, "snr_gs: trial count must be >= 0");
    detail::require(eta_r >= 0.0 && eta_anc >= 0.0, "snr_gs: efficiencies must be >= 0");
    detail::require(var_bg >= 0.0, "snr_gs: background variance must be >= 0");
    signal.validate();
    const double numerator = trials * eta_r * eta_anc * signal.total();
    if (numerator == 0.0) return 0.0;
    if (var_bg == 0.0) throw DomainError("snr_gs: zero background variance with nonzero signal is singular");
    return numerator / (2.0 * std::sqrt(var_bg));
}

/// Everything one side of the comparison needs. `eta` is eta_T for
/// TargetDirect and eta_R for the QI protocols; eta_anc, form and var_signal
/// only matter for the protocols that use them.
struct ChannelParams {
    double eta = 1.0;
    double eta_anc = 1.0;
    SignalModel signal{};
    double var_bg = 1.0;
    SnrForm form = SnrForm::Approximate;
    std::optional<double> var_signal;
};

inline double snr(Protocol protocol, double trials, const ChannelParams& c) {
    switch (protocol) {
        case Protocol::TargetDirect: return snr_target(trials, c.eta, c.signal, c.var_bg, c.form, c.var_signal);
        case Protocol::QiSinglePhoton: return snr_sp(trials, c.eta, c.eta_anc, c.signal, c.var_bg);
        case Protocol::QiGaussian: return snr_gs(trials, c.eta, c.eta_anc, c.signal, c.var_bg);
    }
    return 0.0;
}

struct DetectionResult {
    Protocol protocol;
    double snr;
    double p_err;
    double trials;
};

inline DetectionResult detect(Protocol protocol, double trials, const ChannelParams& c) {
    const double s = snr(protocol, trials, c);
    return {protocol, s, error_probability(s), trials};
}

/// Real-valued K at which the protocol reaches `p_err_target`. Physical trial
/// counts are ceil(K); the ratio R_M uses the continuous value.
inline double required_trials(Protocol protocol, double p_err_target, const ChannelParams& c) {
    const double snr_req = required_snr(p_err_target);
    // SNR(K) = per_root_k * sqrt(K) for the first two, per_k * K for GS.
    // Evaluating at K = 1 gives the coefficient.
    const double unit = snr(protocol, 1.0, c);
    if (unit == 0.0)
        throw InfeasibleError(std::string("required_trials: no signal survives for protocol ") +
                              std::string(to_string(protocol)) + ", K would be infinite");
    if (protocol == Protocol::QiGaussian) return snr_req / unit;
    const double root = snr_req / unit;
    return root * root;
}

// ---------------------------------------------------------------------------
// R_M

enum class Regime { QrwrAdvantage, RadarAdvantage, PracticallyUndetectable };

inline std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::QrwrAdvantage: return "qrwr_advantage";
        case Regime::RadarAdvantage: return "radar_advantage";
        case Regime::PracticallyUndetectable: return "practically_undetectable";
    }
    return "?";
}

inline constexpr double default_undetectable_threshold = 1.0e6;

/// rm < 1: the target notices the radar first. rm >= threshold: the radar is
/// practically undetectable. Everything in between favours the radar.
inline Regime classify_rm(double rm, double undetectable_threshold = default_undetectable_threshold) {
    detail::require(undetectable_threshold >= 1.0, "classify_rm: threshold must be >= 1");
    if (rm < 1.0) return Regime::QrwrAdvantage;
    if (rm >= undetectable_threshold) return Regime::PracticallyUndetectable;
    return Regime::RadarAdvantage;
}

struct RmResult {
    double k_target;
    double k_radar;
    double rm;
    Regime regime;
};

/// R_M = K_T / K_R at a common error probability. The target always counts
/// photons directly; `radar_protocol` is normally SP or GS, TargetDirect is
/// accepted as a symmetric diagnostic.
inline RmResult rm_ratio(Protocol radar_protocol, double p_err_target, const ChannelParams& target,
                         const ChannelParams& radar,
                         double undetectable_threshold = default_undetectable_threshold) {
    RmResult r{};
    r.k_target = required_trials(Protocol::TargetDirect, p_err_target, target);
    r.k_radar = required_trials(radar_protocol, p_err_target, radar);
    r.rm = r.k_target / r.k_radar;
    r.regime = classify_rm(r.rm, undetectable_threshold);
    return r;
}

/// Efficiencies for both sides of one comparison.
struct EfficiencyTriple {
    double eta_t;
    double eta_r;
    double eta_anc;
};

/// Both sides share one background and one signal.
inline RmResult rm_ratio(Protocol radar_protocol, double p_err_target, const EfficiencyTriple& eta,
                         const SignalModel& signal, const RadiationBackground& shared,
                         double undetectable_threshold = default_undetectable_threshold) {
    const double var_bg = background_variance(shared);
    ChannelParams target{.eta = eta.eta_t, .eta_anc = 1.0, .signal = signal, .var_bg = var_bg};
    ChannelParams radar{.eta = eta.eta_r, .eta_anc = eta.eta_anc, .signal = signal, .var_bg = var_bg};
    return rm_ratio(radar_protocol, p_err_target, target, radar, undetectable_threshold);
}

/// Moves an SP-schema R_M computed under a shared background to one where
/// target and radar see different backgrounds. K_T grows linearly with the
/// target's variance and K_SP with the radar's, so the correction is exact
/// for SP; with variance proportional to <N_B> it becomes N_B^target/N_B^radar.
inline double rm_background_correction(double rm, double var_bg_target, double var_bg_radar) {
    detail::require(var_bg_target > 0.0 && var_bg_radar > 0.0,
                    "rm_background_correction: variances must be > 0");
    return rm * (var_bg_target / var_bg_radar);
}

}  // namespace qrwr

#endif  // QRWR_DETECTION_HPP
