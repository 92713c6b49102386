#ifndef QRWR_IO_HPP
#define QRWR_IO_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

#include "qrwr/detection.hpp"
#include "qrwr/hash.hpp"
#include "qrwr/mc_oracle.hpp"
#include "qrwr/sweep.hpp"

namespace qrwr {

inline constexpr std::string_view engine_version = "1.0.0";

/// v rounded to `digits` significant digits (the decimal value nearest to it).
inline double round_significant(double v, int digits = 12) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
    return std::strtod(buf, nullptr);
}

/// Text form used in CSV cells: 12 significant digits, shortest spelling.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace detail {

inline void round_json(nlohmann::json& j) {
    if (j.is_number_float()) {
        const double v = j.get<double>();
        j = std::isfinite(v) ? nlohmann::json(round_significant(v)) : nlohmann::json(nullptr);
    } else if (j.is_structured()) {
        for (auto& child : j) round_json(child);
    }
}

}  // namespace detail

/// What every command prints: the command, a hash of the resolved config,
/// the engine version and the payload. Floats are cut to 12 significant
/// digits when dumped; keys come out sorted.
struct ResultEnvelope {
    std::string command;
    std::uint64_t config_hash = 0;
    nlohmann::json payload = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json j{{"command", command},
                         {"config_hash", hex64(config_hash)},
                         {"engine_version", std::string(engine_version)},
                         {"payload", payload}};
        detail::round_json(j);
        return j;
    }

    std::string dump() const { return to_json().dump(2) + "\n"; }
};

inline nlohmann::json to_json(const Estimate& e) { return {{"value", e.value}, {"std_error", e.std_error}}; }

inline nlohmann::json to_json(const McReport& r) {
    return {{"empirical_p_err", to_json(r.empirical_p_err)},
            {"empirical_snr", to_json(r.empirical_snr)},
            {"analytic_snr", r.analytic_snr},
            {"analytic_p_err", r.analytic_p_err},
            {"z_score", r.z_score},
            {"seed", r.seed},
            {"shots", r.shots},
            {"trials_per_shot", r.trials_per_shot}};
}

inline nlohmann::json to_json(const RmResult& r) {
    return {{"k_target", r.k_target}, {"k_radar", r.k_radar}, {"rm", r.rm}, {"regime", to_string(r.regime)}};
}

inline nlohmann::json to_json(const DetectionResult& d) {
    return {{"protocol", to_string(d.protocol)}, {"snr", d.snr}, {"p_err", d.p_err}, {"trials", d.trials}};
}

inline nlohmann::json to_json(const Axis& a) {
    return {{"name", a.name}, {"min", a.min}, {"max", a.max}, {"points", a.points}, {"scale", to_string(a.scale)}};
}

inline nlohmann::json to_json(const RmContour& c) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : c.points) pts.push_back({p.x, p.y});
    return {{"points", pts}, {"absent_x", c.absent_x}};
}

/// Header `<x name>,<y name>,value,feasible`, one row per node, x major.
inline void write_sweep_csv(std::ostream& out, const SweepResult& r) {
    out << r.x.name << ',' << r.y.name << ",value,feasible\n";
    for (std::size_t i = 0; i < r.x_values.size(); ++i)
        for (std::size_t j = 0; j < r.y_values.size(); ++j) {
            const auto& n = r.at(i, j);
            out << format_number(r.x_values[i]) << ',' << format_number(r.y_values[j]) << ','
                << format_number(n.value) << ',' << (n.feasible ? 1 : 0) << '\n';
        }
}

inline void write_scenario_csv(std::ostream& out, std::span<const ScenarioLine> lines) {
    out << "range_km,weather,eta_atm,eta_x,eta_r,eta_t,ratio,r_m\n";
    for (const auto& line : lines)
        for (const auto& p : line.points)
            out << format_number(p.range_km) << ',' << to_string(p.weather) << ',' << format_number(p.eta_atm) << ','
                << format_number(p.eta_x) << ',' << format_number(p.eta_r) << ',' << format_number(p.eta_t) << ','
                << format_number(p.ratio) << ',' << format_number(p.rm.rm) << '\n';
}

}  // namespace qrwr

#endif  // QRWR_IO_HPP
