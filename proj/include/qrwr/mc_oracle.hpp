#ifndef QRWR_MC_ORACLE_HPP
#define QRWR_MC_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qrwr/background.hpp"
#include "qrwr/detection.hpp"
#include "qrwr/errors.hpp"
#include "qrwr/sampling.hpp"

namespace qrwr {

// Brute-force photon counting experiments. Used as an independent check on
// the closed-form SNR and error-probability maps; nothing here is called by
// the analytic path.

enum class ThresholdRule { Midpoint, Optimal };

inline std::string_view to_string(ThresholdRule r) { return r == ThresholdRule::Midpoint ? "midpoint" : "optimal"; }

struct McConfig {
    std::uint64_t seed = 1;
    long shots = 10000;
    long trials_per_shot = 1;  // K
    SignalModel signal{};
    RadiationBackground background{};
    double efficiency = 1.0;          // eta_T (direct) or eta_R (SP)
    double ancilla_efficiency = 1.0;  // SP only
    ThresholdRule threshold_rule = ThresholdRule::Midpoint;
    unsigned workers = 1;

    void validate() const {
        detail::require(shots >= 1, "mc: shots must be >= 1");
        detail::require(trials_per_shot >= 1, "mc: trials_per_shot must be >= 1");
        detail::require(efficiency >= 0.0 && efficiency <= 1.0, "mc: efficiency must lie in [0, 1]");
        detail::require(ancilla_efficiency >= 0.0 && ancilla_efficiency <= 1.0,
                        "mc: ancilla efficiency must lie in [0, 1]");
        signal.validate();
        background.validate();
    }
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct McReport {
    Estimate empirical_p_err;
    Estimate empirical_snr;
    double analytic_snr = 0.0;
    double analytic_p_err = 0.5;
    double z_score = 0.0;  // (empirical - analytic) p_err in standard errors
    std::uint64_t seed = 0;
    long shots = 0;
    long trials_per_shot = 0;
};

namespace detail {

inline Estimate mean_estimate(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

inline double sample_variance(std::span<const double> xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size() - 1);
}

/// Runs body(shot) for every shot, spread over `workers` threads. The body
/// must only write slots owned by its shot.
template <class Body>
void for_each_shot(long shots, unsigned workers, Body&& body) {
    workers = std::clamp(workers, 1U, static_cast<unsigned>(std::max(1L, shots)));
    if (workers == 1) {
        for (long s = 0; s < shots; ++s) body(s);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (long s = w; s < shots; s += workers) body(s);
        });
}

// Background counts over one trial.
inline std::int64_t draw_background(std::mt19937_64& g, const RadiationBackground& bg, double mu_b) {
    if (bg.variance_model == VarianceModel::Poisson)
        return sample_poisson(g, mu_b * static_cast<double>(bg.mode_count));
    std::int64_t n = 0;
    for (long m = 0; m < bg.mode_count; ++m) n += sample_thermal(g, mu_b);
    return n;
}

inline double midpoint(double m0, double m1) { return 0.5 * (m0 + m1); }

// Likelihood-ratio threshold for N(m0, v0) vs N(m1, v1), m0 <= m1: the point
// in [m0, m1] where the two densities cross.
inline double gaussian_lr_threshold(double m0, double v0, double m1, double v1) {
    if (!(m1 > m0)) return m0;
    auto h = [&](double x) {
        return -(x - m1) * (x - m1) / (2.0 * v1) - 0.5 * std::log(v1) + (x - m0) * (x - m0) / (2.0 * v0) +
               0.5 * std::log(v0);
    };
    double lo = m0;
    double hi = m1;
    if (h(lo) >= 0.0 || h(hi) <= 0.0) return midpoint(m0, m1);
    for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++i) {
        const double mid = midpoint(lo, hi);
        (h(mid) < 0.0 ? lo : hi) = mid;
    }
    return midpoint(lo, hi);
}

inline void fill_p_err(McReport& rep, std::span<const double> errors) {
    rep.empirical_p_err = mean_estimate(errors);
    rep.analytic_p_err = error_probability(rep.analytic_snr);
    const double se = rep.empirical_p_err.std_error;
    rep.z_score = se > 0.0 ? (rep.empirical_p_err.value - rep.analytic_p_err) / se : 0.0;
}

}  // namespace detail

/// Direct photon counting at the target, H0 = background only versus
/// H1 = background plus a Poisson signal of mean eta N_S per trial, each
/// hypothesis drawn once per shot and summed over K trials.
///
/// The SNR reported here is the squared deflection (m1 - m0)^2 / var, the
/// quantity for which erfc(sqrt(SNR/8))/2 is the midpoint-rule error of two
/// equal-variance Gaussians. analytic_snr = K (eta N_S)^2 / var_B.
inline McReport simulate_direct_detection(const McConfig& cfg) {
    cfg.validate();
    const double k = static_cast<double>(cfg.trials_per_shot);
    const double mu_b = cfg.background.occupancy();
    const double n_b = background_counts(cfg.background);
    const double var_b = background_variance(cfg.background);
    const double s = cfg.efficiency * cfg.signal.total();

    const double m0 = k * n_b;
    const double m1 = k * (n_b + s);
    const double threshold = cfg.threshold_rule == ThresholdRule::Midpoint
                                 ? detail::midpoint(m0, m1)
                                 : detail::gaussian_lr_threshold(m0, k * var_b, m1, k * (var_b + s));

    const auto n = static_cast<std::size_t>(cfg.shots);
    std::vector<double> c0(n), c1(n), err(n);
    detail::for_each_shot(cfg.shots, cfg.workers, [&](long shot) {
        auto g0 = substream(cfg.seed, 0, static_cast<std::uint64_t>(shot));
        auto g1 = substream(cfg.seed, 1, static_cast<std::uint64_t>(shot));
        std::int64_t h0 = 0;
        std::int64_t h1 = 0;
        for (long t = 0; t < cfg.trials_per_shot; ++t) {
            h0 += detail::draw_background(g0, cfg.background, mu_b);
            h1 += detail::draw_background(g1, cfg.background, mu_b);
        }
        h1 += sample_poisson(g1, k * s);
        const auto i = static_cast<std::size_t>(shot);
        c0[i] = static_cast<double>(h0);
        c1[i] = static_cast<double>(h1);
        err[i] = 0.5 * ((c0[i] > threshold ? 1.0 : 0.0) + (c1[i] > threshold ? 0.0 : 1.0));
    });

    McReport rep;
    rep.seed = cfg.seed;
    rep.shots = cfg.shots;
    rep.trials_per_shot = cfg.trials_per_shot;
    rep.analytic_snr = var_b > 0.0 ? k * s * s / var_b : 0.0;
    detail::fill_p_err(rep, err);

    const auto e0 = detail::mean_estimate(c0);
    const auto e1 = detail::mean_estimate(c1);
    const double v0 = detail::sample_variance(c0, e0.value);
    const double v1 = detail::sample_variance(c1, e1.value);
    const double v = 0.5 * (v0 + v1);
    if (v > 0.0) {
        const double d = e1.value - e0.value;
        const double var_d = (v0 + v1) / static_cast<double>(n);
        const double var_d2 = 4.0 * d * d * var_d + 2.0 * var_d * var_d;
        const double var_v = (v0 * v0 + v1 * v1) / (2.0 * static_cast<double>(n));
        rep.empirical_snr.value = d * d / v;
        rep.empirical_snr.std_error =
            std::sqrt(var_d2 / (v * v) + (d * d / (v * v)) * (d * d / (v * v)) * var_v);
    }
    return rep;
}

/// Standard deviation over shots of the sample covariance estimator under the
/// pair model below, and its mean: what the sampler should reproduce.
struct SpModelPrediction {
    double covariance;  // E[C] = eta_R eta_anc M mu (1 + mu)
    double snr;         // E[C] / sd(C)
};

inline SpModelPrediction sp_model_prediction(const McConfig& cfg) {
    const double k = static_cast<double>(cfg.trials_per_shot);
    const double m = static_cast<double>(cfg.signal.modes);
    const double mu = cfg.signal.mu;
    const double er = cfg.efficiency;
    const double ea = cfg.ancilla_efficiency;
    const double pair_var = m * mu * (1.0 + mu);
    const double cov = er * ea * pair_var;
    // Thinned thermal arm: mean e M mu, variance e M mu (1 + e mu).
    const double var1 = background_variance(cfg.background) + er * m * mu * (1.0 + er * mu);
    const double var2 = ea * m * mu * (1.0 + ea * mu);
    // Var of a sample covariance of K jointly Gaussian pairs: (v1 v2 + c^2) / (K - 1).
    const double sd = std::sqrt((var1 * var2 + cov * cov) / std::max(1.0, k - 1.0));
    return {cov, sd > 0.0 ? cov / sd : 0.0};
}

/// Single-photon QI covariance measurement.
///
/// Pair model: each of the M signal modes carries a thermal number of pairs
/// with mean mu. The same pairs are thinned independently, eta_R on the
/// signal arm and eta_anc on the ancilla arm, and the signal arm also sees
/// the background. Per shot the statistic is the sample covariance of
/// (N1, N2) over K trials; H0 repeats this with the target absent
/// (eta_R = 0). empirical_snr = mean(C)/sd(C) under H1; analytic_snr is the
/// closed-form SP SNR, whose absolute prefactor is not fixed by this model
/// (see sp_model_prediction for what the model itself implies).
inline McReport simulate_sp_covariance(const McConfig& cfg) {
    cfg.validate();
    detail::require(cfg.trials_per_shot >= 2, "mc: covariance needs at least 2 trials per shot");
    const double mu_b = cfg.background.occupancy();
    const auto k = static_cast<std::size_t>(cfg.trials_per_shot);

    auto covariance_statistic = [&](std::mt19937_64& g, double eta_r) {
        std::vector<double> n1(k), n2(k);
        for (std::size_t t = 0; t < k; ++t) {
            std::int64_t a = 0;
            std::int64_t b = 0;
            for (long m = 0; m < cfg.signal.modes; ++m) {
                const std::int64_t pairs = sample_thermal(g, cfg.signal.mu);
                a += sample_binomial(g, pairs, eta_r);
                b += sample_binomial(g, pairs, cfg.ancilla_efficiency);
            }
            a += detail::draw_background(g, cfg.background, mu_b);
            n1[t] = static_cast<double>(a);
            n2[t] = static_cast<double>(b);
        }
        const double m1 = std::accumulate(n1.begin(), n1.end(), 0.0) / static_cast<double>(k);
        const double m2 = std::accumulate(n2.begin(), n2.end(), 0.0) / static_cast<double>(k);
        double c = 0.0;
        for (std::size_t t = 0; t < k; ++t) c += (n1[t] - m1) * (n2[t] - m2);
        return c / static_cast<double>(k - 1);
    };

    const double threshold = 0.5 * sp_model_prediction(cfg).covariance;
    const auto n = static_cast<std::size_t>(cfg.shots);
    std::vector<double> c_h1(n), err(n);
    detail::for_each_shot(cfg.shots, cfg.workers, [&](long shot) {
        auto g0 = substream(cfg.seed, 2, static_cast<std::uint64_t>(shot));
        auto g1 = substream(cfg.seed, 3, static_cast<std::uint64_t>(shot));
        const double c0 = covariance_statistic(g0, 0.0);
        const double c1 = covariance_statistic(g1, cfg.efficiency);
        const auto i = static_cast<std::size_t>(shot);
        c_h1[i] = c1;
        err[i] = 0.5 * ((c0 > threshold ? 1.0 : 0.0) + (c1 > threshold ? 0.0 : 1.0));
    });

    McReport rep;
    rep.seed = cfg.seed;
    rep.shots = cfg.shots;
    rep.trials_per_shot = cfg.trials_per_shot;
    const double var_b = background_variance(cfg.background);
    rep.analytic_snr = var_b > 0.0 ? snr_sp(static_cast<double>(k), cfg.efficiency, cfg.ancilla_efficiency,
                                            cfg.signal, var_b)
                                   : 0.0;
    detail::fill_p_err(rep, err);

    const auto mean_c = detail::mean_estimate(c_h1);
    const double sd_c = std::sqrt(detail::sample_variance(c_h1, mean_c.value));
    if (sd_c > 0.0) {
        const double r = mean_c.value / sd_c;
        rep.empirical_snr.value = r;
        rep.empirical_snr.std_error = std::sqrt((1.0 + 0.5 * r * r) / static_cast<double>(n));
    }
    return rep;
}

/// Runs the direct-detection experiment at each requested SNR (squared
/// deflection) by choosing the per-trial signal s = sqrt(SNR var_B / K), and
/// reports how far the empirical error sits from erfc(sqrt(SNR/8))/2.
/// Requires mu_B K >= 100 (and M_B K >= 100 for thermal backgrounds) so the
/// summed counts are in the Gaussian regime.
inline std::vector<McReport> validate_erfc(std::span<const double> snr_grid, const McConfig& cfg) {
    cfg.validate();
    const double mu_b = cfg.background.occupancy();
    const double k = static_cast<double>(cfg.trials_per_shot);
    if (mu_b * k < 100.0)
        throw DomainError("validate_erfc: mu_B * K = " + std::to_string(mu_b * k) +
                          " < 100; counts are not in the Gaussian regime, raise occupancy or trials");
    // A thermal mode is geometric however large its mean; only the number of
    // summed modes makes the total Gaussian.
    const double terms = k * static_cast<double>(cfg.background.mode_count);
    if (cfg.background.variance_model == VarianceModel::ThermalMultimode && terms < 100.0)
        throw DomainError("validate_erfc: thermal background sums M_B * K = " + std::to_string(terms) +
                          " < 100 geometric terms; counts are not in the Gaussian regime, raise modes or trials");
    for (double snr_value : snr_grid)
        if (!(snr_value > 0.0)) throw DomainError("validate_erfc: every SNR must be > 0");

    const double var_b = background_variance(cfg.background);
    std::vector<McReport> out;
    out.reserve(snr_grid.size());
    for (std::size_t i = 0; i < snr_grid.size(); ++i) {
        McConfig c = cfg;
        c.signal = SignalModel{std::sqrt(snr_grid[i] * var_b / k), 1};
        c.efficiency = 1.0;
        c.threshold_rule = ThresholdRule::Midpoint;
        c.seed = splitmix64(cfg.seed + i);
        out.push_back(simulate_direct_detection(c));
    }
    return out;
}

}  // namespace qrwr

#endif  // QRWR_MC_ORACLE_HPP
