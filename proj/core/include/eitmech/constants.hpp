#pragma once

namespace eitmech {

// CODATA values; the only microscopic constants the model needs.
inline constexpr double speed_of_light = 299792458.0;        // m/s
inline constexpr double hbar           = 1.054571817e-34;    // J s
inline constexpr double pi             = 3.141592653589793238462643383279502884;
inline constexpr double two_pi         = 2.0 * pi;

// Config files quote frequencies as linear MHz; internally everything is rad/s.
inline constexpr double mhz_to_radps(double f_mhz) { return two_pi * 1.0e6 * f_mhz; }
inline constexpr double radps_to_mhz(double w) { return w / (two_pi * 1.0e6); }

} // namespace eitmech
