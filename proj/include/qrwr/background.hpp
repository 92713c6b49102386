#ifndef QRWR_BACKGROUND_HPP
#define QRWR_BACKGROUND_HPP

#include <cmath>
#include <optional>
#include <string_view>

#include "qrwr/constants.hpp"
#include "qrwr/errors.hpp"

namespace qrwr {

enum class VarianceModel { Poisson, ThermalMultimode };

inline std::string_view to_string(VarianceModel m) {
    return m == VarianceModel::Poisson ? "poisson" : "thermal";
}

/// Mean Bose-Einstein occupancy of one mode, 1/(exp(h nu / k T) - 1).
inline double planck_occupancy(double frequency_hz, double temperature_k) {
    detail::require(frequency_hz > 0.0 && std::isfinite(frequency_hz), "planck_occupancy: frequency must be > 0");
    detail::require(temperature_k > 0.0 && std::isfinite(temperature_k), "planck_occupancy: temperature must be > 0");
    const double x = constants::planck * frequency_hz / (constants::boltzmann * temperature_k);
    // expm1 keeps the Rayleigh-Jeans end (x -> 0) accurate.
    return 1.0 / std::expm1(x);
}

/// Thermal background seen by a detector: M_B modes with per-mode mean mu_B.
/// mu_B comes from the blackbody formula unless an override is given.
struct RadiationBackground {
    double temperature_k = constants::solar_temperature_k;
    double frequency_hz = constants::microwave_reference_hz;
    long mode_count = 1;
    std::optional<double> occupancy_override;
    VarianceModel variance_model = VarianceModel::ThermalMultimode;

    void validate() const {
        detail::require(temperature_k > 0.0 && std::isfinite(temperature_k), "background: temperature must be > 0");
        detail::require(frequency_hz > 0.0 && std::isfinite(frequency_hz), "background: frequency must be > 0");
        detail::require(mode_count >= 1, "background: mode_count must be >= 1");
        if (occupancy_override)
            detail::require(*occupancy_override >= 0.0 && std::isfinite(*occupancy_override),
                            "background: occupancy must be >= 0");
    }

    /// mu_B.
    double occupancy() const {
        validate();
        return occupancy_override ? *occupancy_override : planck_occupancy(frequency_hz, temperature_k);
    }

    /// Background with a fixed total mean count spread evenly over `modes`.
    static RadiationBackground with_total(double total_mean, long modes = 1,
                                          VarianceModel model = VarianceModel::ThermalMultimode) {
        detail::require(modes >= 1, "background: mode_count must be >= 1");
        RadiationBackground bg;
        bg.mode_count = modes;
        bg.occupancy_override = total_mean / static_cast<double>(modes);
        bg.variance_model = model;
        bg.validate();
        return bg;
    }

    bool operator==(const RadiationBackground&) const = default;
};

/// <N_B> = M_B mu_B.
inline double background_counts(const RadiationBackground& bg) {
    return static_cast<double>(bg.mode_count) * bg.occupancy();
}

/// delta^2 N_B. Poisson: M mu. Thermal multimode: M mu (1 + mu), the sum of
/// M independent Bose-Einstein (geometric) modes.
inline double background_variance(const RadiationBackground& bg) {
    const double mu = bg.occupancy();
    const double m = static_cast<double>(bg.mode_count);
    switch (bg.variance_model) {
        case VarianceModel::Poisson:
            return m * mu;
        case VarianceModel::ThermalMultimode:
            return m * mu * (1.0 + mu);
    }
    return m * mu;
}

}  // namespace qrwr

#endif  // QRWR_BACKGROUND_HPP
