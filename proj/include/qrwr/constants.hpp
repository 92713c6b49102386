#ifndef QRWR_CONSTANTS_HPP
#define QRWR_CONSTANTS_HPP

namespace qrwr::constants {

// CODATA 2018 (exact since the 2019 SI redefinition).
inline constexpr double planck = 6.626070150e-34;     // J s
inline constexpr double boltzmann = 1.380649000e-23;  // J / K

// Surface of the sun, roughly 6000 degC.
inline constexpr double solar_temperature_k = 6273.0;

// X-band reference; puts the solar per-mode occupancy near 1e4.
inline constexpr double microwave_reference_hz = 10.0e9;

// Visible reference for the microwave/optical occupancy comparison.
inline constexpr double optical_reference_hz = 430.0e12;

// Two-sigma detection: success 95.45 %.
inline constexpr double two_sigma_p_err = 0.0455;

}  // namespace qrwr::constants

#endif  // QRWR_CONSTANTS_HPP
