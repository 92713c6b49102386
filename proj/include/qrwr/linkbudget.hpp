#ifndef QRWR_LINKBUDGET_HPP
#define QRWR_LINKBUDGET_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string_view>
#include <utility>
#include <vector>

#include "qrwr/errors.hpp"

namespace qrwr {

enum class Weather { Good, Bad };

inline std::string_view to_string(Weather w) { return w == Weather::Good ? "good" : "bad"; }

struct AttenuationAnchor {
    double range_km;
    double transmission;

    bool operator==(const AttenuationAnchor&) const = default;
};

/// One-way atmospheric transmission tables per weather class.
///
/// The curve passes through (0 km, 1) and every anchor exactly, is log-linear
/// between neighbours, and beyond the last anchor follows exp(-alpha r) with
/// alpha = -ln(T_last) / r_last. The two good-weather anchors are not
/// consistent with a single exponent (0.98 at 25 km extrapolates to ~0.85 at
/// 200 km, the table says 0.82), which is why the table is kept.
///
/// The visibility values that accompany the classes (300 m / 30 m) are
/// labels only.
struct AtmosphereModel {
    std::vector<AttenuationAnchor> good{{25.0, 0.98}, {200.0, 0.82}};
    std::vector<AttenuationAnchor> bad{{25.0, 0.50}, {200.0, 0.004}};

    const std::vector<AttenuationAnchor>& anchors(Weather w) const { return w == Weather::Good ? good : bad; }

    /// Extinction coefficient [1/km] used past the outermost anchor.
    double extrapolation_coefficient(Weather w) const {
        const auto& a = anchors(w);
        if (a.empty()) return 0.0;
        return -std::log(a.back().transmission) / a.back().range_km;
    }

    void validate() const {
        for (const auto* table : {&good, &bad}) {
            double last_r = 0.0;
            double last_t = 1.0;
            for (const auto& a : *table) {
                detail::require(a.range_km > last_r, "atmosphere: anchor ranges must be > 0 and strictly increasing");
                detail::require(a.transmission > 0.0 && a.transmission <= last_t,
                                "atmosphere: transmissions must lie in (0, 1] and be non-increasing");
                last_r = a.range_km;
                last_t = a.transmission;
            }
        }
    }

    bool operator==(const AtmosphereModel&) const = default;
};

/// eta_atm for a one-way path of `range_km`.
inline double atmosphere_attenuation(double range_km, Weather weather, const AtmosphereModel& model = {}) {
    detail::require(range_km >= 0.0 && std::isfinite(range_km), "atmosphere_attenuation: range must be >= 0");
    const auto& table = model.anchors(weather);
    if (range_km == 0.0 || table.empty()) return 1.0;

    double r0 = 0.0;
    double t0 = 1.0;
    for (const auto& a : table) {
        if (range_km == a.range_km) return a.transmission;
        if (range_km < a.range_km) {
            const double frac = (range_km - r0) / (a.range_km - r0);
            return std::exp(std::log(t0) + frac * (std::log(a.transmission) - std::log(t0)));
        }
        r0 = a.range_km;
        t0 = a.transmission;
    }
    return std::exp(-model.extrapolation_coefficient(weather) * range_km);
}

/// eta_X = sigma / (4 pi R^2): the fraction of the isotropically re-radiated
/// signal that lands back on the radar. Classical RCS stands in for the
/// quantum one. Clamped to 1.
inline double geometric_return(double rcs_m2, double range_m) {
    detail::require(rcs_m2 > 0.0 && std::isfinite(rcs_m2), "geometric_return: rcs must be > 0");
    detail::require(range_m > 0.0 && std::isfinite(range_m), "geometric_return: range must be > 0");
    return std::min(1.0, rcs_m2 / (4.0 * std::numbers::pi * range_m * range_m));
}

/// eta_DA: detector area over the target's effective area, given the photon
/// hit the target. Clamped to 1.
inline double aperture_fraction(double detector_area_m2, double rcs_m2) {
    detail::require(detector_area_m2 > 0.0 && std::isfinite(detector_area_m2),
                    "aperture_fraction: detector area must be > 0");
    detail::require(rcs_m2 > 0.0 && std::isfinite(rcs_m2), "aperture_fraction: rcs must be > 0");
    return std::min(1.0, detector_area_m2 / rcs_m2);
}

struct GeometryInputs {
    double range_m = 25.0e3;
    double rcs_m2 = 2.0;
    double detector_area_m2 = 0.01;

    void validate() const {
        detail::require(range_m > 0.0, "geometry: range must be > 0");
        detail::require(rcs_m2 > 0.0, "geometry: rcs must be > 0");
        detail::require(detector_area_m2 > 0.0, "geometry: detector area must be > 0");
    }
};

/// The individual efficiency factors. eta_atm is one-way; the radar arm sees
/// it twice. eta_anc (ancilla arm) is kept distinct from eta_atm even though
/// both are commonly written eta_A.
struct LinkEfficiencies {
    double eta_atm = 1.0;
    double eta_det = 1.0;
    double eta_aperture = 1.0;
    double eta_return = 1.0;
    double eta_idler = 1.0;

    void validate() const {
        for (double f : {eta_atm, eta_det, eta_aperture, eta_return, eta_idler})
            detail::require(f >= 0.0 && f <= 1.0, "efficiencies: every factor must lie in [0, 1]");
    }

    bool operator==(const LinkEfficiencies&) const = default;
};

struct ComposedEfficiencies {
    double eta_t;    // target detector: eta_atm eta_det eta_aperture
    double eta_r;    // radar signal arm: eta_atm^2 eta_return eta_det
    double eta_anc;  // ancilla arm: eta_idler eta_det
    double ratio;    // eta_r / eta_t = eta_atm eta_return / eta_aperture
};

inline ComposedEfficiencies compose_efficiencies(const LinkEfficiencies& f) {
    f.validate();
    ComposedEfficiencies out{};
    out.eta_t = f.eta_atm * f.eta_det * f.eta_aperture;
    out.eta_r = f.eta_atm * f.eta_atm * f.eta_return * f.eta_det;
    out.eta_anc = f.eta_idler * f.eta_det;
    // Closed form; stays defined when eta_det is 0.
    out.ratio = f.eta_aperture > 0.0 ? f.eta_atm * f.eta_return / f.eta_aperture : 0.0;
    return out;
}

/// Detector and ancilla parameters that do not depend on range or weather.
struct LinkParameters {
    double eta_det = 0.5;
    double eta_idler = 0.8;
    double rcs_m2 = 2.0;
    double detector_area_m2 = 0.01;
    AtmosphereModel atmosphere{};

    bool operator==(const LinkParameters&) const = default;
};

/// Full factor set at one range/weather point.
inline LinkEfficiencies link_factors(double range_km, Weather weather, const LinkParameters& p) {
    detail::require(range_km > 0.0, "link_factors: range must be > 0");
    LinkEfficiencies f;
    f.eta_atm = atmosphere_attenuation(range_km, weather, p.atmosphere);
    f.eta_det = p.eta_det;
    f.eta_aperture = aperture_fraction(p.detector_area_m2, p.rcs_m2);
    f.eta_return = geometric_return(p.rcs_m2, range_km * 1.0e3);
    f.eta_idler = p.eta_idler;
    return f;
}

}  // namespace qrwr

#endif  // QRWR_LINKBUDGET_HPP
