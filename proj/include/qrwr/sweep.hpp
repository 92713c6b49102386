#ifndef QRWR_SWEEP_HPP
#define QRWR_SWEEP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "qrwr/background.hpp"
#include "qrwr/constants.hpp"
#include "qrwr/contour.hpp"
#include "qrwr/detection.hpp"
#include "qrwr/errors.hpp"
#include "qrwr/hash.hpp"
#include "qrwr/linkbudget.hpp"

namespace qrwr {

enum class Quantity { Rm, SnrTarget, SnrRadar, Perr };

inline std::string_view to_string(Quantity q) {
    switch (q) {
        case Quantity::Rm: return "rm";
        case Quantity::SnrTarget: return "snr_target";
        case Quantity::SnrRadar: return "snr_radar";
        case Quantity::Perr: return "perr";
    }
    return "?";
}

enum class AxisScale { Log, Linear };

inline std::string_view to_string(AxisScale s) { return s == AxisScale::Log ? "log" : "linear"; }

/// Parameters a sweep axis may name.
inline constexpr std::string_view sweep_parameters[] = {
    "n_s", "mu", "modes", "eta_t", "eta_r", "eta_ratio", "eta_anc",
    "n_b", "mu_b", "temperature", "frequency", "p_err", "trials",
};

inline bool is_sweep_parameter(std::string_view name) {
    return std::find(std::begin(sweep_parameters), std::end(sweep_parameters), name) != std::end(sweep_parameters);
}

struct Axis {
    std::string name;
    double min = 1.0;
    double max = 10.0;
    int points = 2;
    AxisScale scale = AxisScale::Log;

    void validate() const {
        if (!is_sweep_parameter(name)) throw ConfigError("sweep", "unknown sweep parameter '" + name + "'");
        if (!(min < max)) throw ConfigError("sweep", "axis '" + name + "': min must be < max");
        if (points < 1) throw ConfigError("sweep", "axis '" + name + "': points must be >= 1");
        if (scale == AxisScale::Log && min <= 0.0)
            throw ConfigError("sweep", "axis '" + name + "': log axis needs min > 0");
    }

    /// Grid nodes, endpoints included. One point collapses to `min`.
    std::vector<double> values() const {
        std::vector<double> v(static_cast<std::size_t>(points));
        if (points == 1) {
            v[0] = min;
            return v;
        }
        for (int i = 0; i < points; ++i) {
            const double t = static_cast<double>(i) / (points - 1);
            v[static_cast<std::size_t>(i)] =
                scale == AxisScale::Log ? std::exp(std::log(min) + t * (std::log(max) - std::log(min)))
                                        : min + t * (max - min);
        }
        v.front() = min;
        v.back() = max;
        return v;
    }

    bool operator==(const Axis&) const = default;
};

/// Flat parameter set evaluated at each sweep node. n_s, n_b and eta_ratio
/// are totals/ratios resolved at evaluation time, so the order in which axes
/// are applied never matters.
struct OperatingPoint {
    Protocol radar_protocol = Protocol::QiGaussian;
    SignalModel signal{};
    RadiationBackground background{};
    double eta_t = 1.0e-4;
    double eta_r = 1.0e-8;
    double eta_anc = 0.8;
    std::optional<double> n_s;        // total signal, overrides mu
    std::optional<double> n_b;        // total background, overrides mu_B
    std::optional<double> eta_ratio;  // eta_r / eta_t, overrides eta_r
    double p_err = constants::two_sigma_p_err;
    double trials = 1.0;  // K for the SNR and P_err quantities
    SnrForm target_form = SnrForm::Approximate;
    double undetectable_threshold = default_undetectable_threshold;

    void set(std::string_view name, double v) {
        if (name == "n_s") n_s = v;
        else if (name == "mu") { signal.mu = v; n_s.reset(); }
        else if (name == "modes") signal.modes = std::max(1L, std::lround(v));
        else if (name == "eta_t") eta_t = v;
        else if (name == "eta_r") { eta_r = v; eta_ratio.reset(); }
        else if (name == "eta_ratio") eta_ratio = v;
        else if (name == "eta_anc") eta_anc = v;
        else if (name == "n_b") n_b = v;
        else if (name == "mu_b") { background.occupancy_override = v; n_b.reset(); }
        else if (name == "temperature") { background.temperature_k = v; background.occupancy_override.reset(); n_b.reset(); }
        else if (name == "frequency") { background.frequency_hz = v; background.occupancy_override.reset(); n_b.reset(); }
        else if (name == "p_err") p_err = v;
        else if (name == "trials") trials = v;
        else throw ConfigError("sweep", "unknown sweep parameter '" + std::string(name) + "'");
    }

    SignalModel resolved_signal() const {
        SignalModel s = signal;
        if (n_s) s.mu = *n_s / static_cast<double>(s.modes);
        return s;
    }

    RadiationBackground resolved_background() const {
        RadiationBackground b = background;
        if (n_b) b.occupancy_override = *n_b / static_cast<double>(b.mode_count);
        return b;
    }

    double resolved_eta_r() const { return eta_ratio ? *eta_ratio * eta_t : eta_r; }

    ChannelParams target_channel() const {
        return {.eta = eta_t, .eta_anc = 1.0, .signal = resolved_signal(),
                .var_bg = background_variance(resolved_background()), .form = target_form};
    }

    ChannelParams radar_channel() const {
        return {.eta = resolved_eta_r(), .eta_anc = eta_anc, .signal = resolved_signal(),
                .var_bg = background_variance(resolved_background())};
    }

    RmResult rm() const {
        return rm_ratio(radar_protocol, p_err, target_channel(), radar_channel(), undetectable_threshold);
    }
};

/// nullopt when the node is infeasible (domain or infeasibility error).
/// P_err is the target-side error probability after `trials` measurements.
inline std::optional<double> evaluate(const OperatingPoint& op, Quantity q) {
    try {
        switch (q) {
            case Quantity::Rm: return op.rm().rm;
            case Quantity::SnrTarget: return snr(Protocol::TargetDirect, op.trials, op.target_channel());
            case Quantity::SnrRadar: return snr(op.radar_protocol, op.trials, op.radar_channel());
            case Quantity::Perr:
                return error_probability(snr(Protocol::TargetDirect, op.trials, op.target_channel()));
        }
    } catch (const DomainError&) {
    }
    return std::nullopt;
}

struct SweepSpec {
    Axis x{"n_s", 1e-4, 10.0, 41};
    Axis y{"eta_ratio", 1e-8, 1.0, 41};
    OperatingPoint fixed{};
    Quantity quantity = Quantity::Rm;

    void validate() const {
        x.validate();
        y.validate();
        if (x.name == y.name) throw ConfigError("sweep", "x and y must name different parameters");
        // Pairs that overwrite each other; either order would be ambiguous.
        static constexpr std::pair<std::string_view, std::string_view> conflicts[] = {
            {"n_s", "mu"},         {"eta_r", "eta_ratio"}, {"n_b", "mu_b"},           {"n_b", "temperature"},
            {"n_b", "frequency"},  {"mu_b", "temperature"}, {"mu_b", "frequency"},
        };
        for (const auto& [a, b] : conflicts)
            if ((x.name == a && y.name == b) || (x.name == b && y.name == a))
                throw ConfigError("sweep", "axes '" + x.name + "' and '" + y.name + "' set the same quantity");
    }
};

namespace detail {

inline void append_number(std::string& out, const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.17g;", key, v);
    out += buf;
}

}  // namespace detail

/// Text that identifies a sweep up to bitwise equality of its inputs.
inline std::string canonical_string(const SweepSpec& s) {
    std::string out;
    for (const Axis* a : {&s.x, &s.y}) {
        out += a->name + ":" + (a->scale == AxisScale::Log ? "log" : "lin") + ";";
        detail::append_number(out, "min", a->min);
        detail::append_number(out, "max", a->max);
        detail::append_number(out, "points", a->points);
    }
    const OperatingPoint& op = s.fixed;
    out += "protocol=" + std::string(to_string(op.radar_protocol)) + ";";
    out += "quantity=" + std::string(to_string(s.quantity)) + ";";
    detail::append_number(out, "mu", op.signal.mu);
    detail::append_number(out, "modes", static_cast<double>(op.signal.modes));
    detail::append_number(out, "temperature", op.background.temperature_k);
    detail::append_number(out, "frequency", op.background.frequency_hz);
    detail::append_number(out, "bg_modes", static_cast<double>(op.background.mode_count));
    if (op.background.occupancy_override) detail::append_number(out, "mu_b", *op.background.occupancy_override);
    out += "variance=" + std::string(to_string(op.background.variance_model)) + ";";
    detail::append_number(out, "eta_t", op.eta_t);
    detail::append_number(out, "eta_r", op.eta_r);
    detail::append_number(out, "eta_anc", op.eta_anc);
    if (op.n_s) detail::append_number(out, "n_s", *op.n_s);
    if (op.n_b) detail::append_number(out, "n_b", *op.n_b);
    if (op.eta_ratio) detail::append_number(out, "eta_ratio", *op.eta_ratio);
    detail::append_number(out, "p_err", op.p_err);
    detail::append_number(out, "trials", op.trials);
    detail::append_number(out, "threshold", op.undetectable_threshold);
    if (op.target_form == SnrForm::Exact) out += "form=exact;";
    return out;
}

struct GridNode {
    double value = 0.0;
    bool feasible = false;

    bool operator==(const GridNode&) const = default;
};

struct SweepResult {
    Axis x;
    Axis y;
    Quantity quantity = Quantity::Rm;
    std::vector<double> x_values;
    std::vector<double> y_values;
    std::vector<GridNode> grid;  // grid[i * ny + j] for x index i, y index j
    std::uint64_t scenario_hash = 0;
    std::string timestamp;  // filled by the caller; never by sweep_grid

    const GridNode& at(std::size_t i, std::size_t j) const { return grid[i * y_values.size() + j]; }
};

inline OperatingPoint node_point(const SweepSpec& spec, double x, double y) {
    OperatingPoint op = spec.fixed;
    op.set(spec.x.name, x);
    op.set(spec.y.name, y);
    return op;
}

/// Evaluates `spec.quantity` at every node. Rows are spread over `workers`
/// threads, each writing only its own slots, so the result does not depend on
/// the worker count.
inline SweepResult sweep_grid(const SweepSpec& spec, unsigned workers = 1) {
    spec.validate();
    SweepResult r;
    r.x = spec.x;
    r.y = spec.y;
    r.quantity = spec.quantity;
    r.x_values = spec.x.values();
    r.y_values = spec.y.values();
    r.grid.resize(r.x_values.size() * r.y_values.size());
    r.scenario_hash = fnv1a64(canonical_string(spec));

    const std::size_t ny = r.y_values.size();
    auto row = [&](std::size_t i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const auto v = evaluate(node_point(spec, r.x_values[i], r.y_values[j]), spec.quantity);
            r.grid[i * ny + j] = v && std::isfinite(*v) ? GridNode{*v, true} : GridNode{0.0, false};
        }
    };

    workers = std::clamp(workers, 1U, static_cast<unsigned>(std::max<std::size_t>(1, r.x_values.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < r.x_values.size(); ++i) row(i);
        return r;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < r.x_values.size(); i += workers) row(i);
        });
    pool.clear();
    return r;
}

struct ContourPoint {
    double x;
    double y;
};

struct RmContour {
    std::vector<ContourPoint> points;  // ordered by x, then y
    std::vector<double> absent_x;      // grid lines with no crossing
};

/// Where R_M = 1, scanning y on every x grid line. All bracketed crossings on
/// a line are returned, so non-monotone windows are visible in the output.
inline RmContour contour_rm_unity(const SweepSpec& spec, double tol = 1e-12) {
    spec.validate();
    const auto xs = spec.x.values();
    const auto ys = spec.y.values();
    RmContour out;
    for (double x : xs) {
        auto residual = [&](double y) -> std::optional<double> {
            OperatingPoint op = node_point(spec, x, y);
            try {
                const double rm = op.rm().rm;
                if (!(rm > 0.0) || !std::isfinite(rm)) return std::nullopt;
                return std::log10(rm);
            } catch (const DomainError&) {
                return std::nullopt;
            }
        };
        const auto roots = find_level_crossings(residual, ys, spec.y.scale == AxisScale::Log, tol);
        if (roots.empty()) out.absent_x.push_back(x);
        for (double y : roots) out.points.push_back({x, y});
    }
    return out;
}

struct ScenarioPoint {
    double range_km;
    Weather weather;
    double eta_atm;
    double eta_x;
    double eta_r;
    double eta_t;
    double eta_anc;
    double ratio;  // eta_r / eta_t
    RmResult rm;
};

struct ScenarioLine {
    Weather weather;
    std::vector<ScenarioPoint> points;
};

/// One row per range: link budget at that range, then R_M at `p_err`
/// (two-sigma by default) with the given radar protocol.
inline ScenarioLine scenario_line(std::span<const double> ranges_km, Weather weather, const LinkParameters& link,
                                  const RadiationBackground& background, Protocol protocol,
                                  const SignalModel& signal, double p_err = constants::two_sigma_p_err,
                                  double undetectable_threshold = default_undetectable_threshold) {
    ScenarioLine line{weather, {}};
    for (std::size_t i = 1; i < ranges_km.size(); ++i)
        detail::require(ranges_km[i] > ranges_km[i - 1], "scenario_line: ranges must be strictly increasing");
    link.atmosphere.validate();

    line.points.reserve(ranges_km.size());
    for (double r : ranges_km) {
        const LinkEfficiencies f = link_factors(r, weather, link);
        const ComposedEfficiencies c = compose_efficiencies(f);
        ScenarioPoint p{};
        p.range_km = r;
        p.weather = weather;
        p.eta_atm = f.eta_atm;
        p.eta_x = f.eta_return;
        p.eta_r = c.eta_r;
        p.eta_t = c.eta_t;
        p.eta_anc = c.eta_anc;
        p.ratio = c.ratio;
        p.rm = rm_ratio(protocol, p_err, EfficiencyTriple{c.eta_t, c.eta_r, c.eta_anc}, signal, background,
                        undetectable_threshold);
        line.points.push_back(p);
    }
    return line;
}

}  // namespace qrwr

#endif  // QRWR_SWEEP_HPP
