#pragma once

namespace rydlens::constants {

inline constexpr double c0       = 299792458.0;     // vacuum speed of light, m/s
inline constexpr double planck_h = 6.62607015e-34;  // Planck constant, J s (exact, SI 2019)
inline constexpr double eta0     = 376.730313668;   // impedance of free space, ohm
inline constexpr double pi       = 3.14159265358979323846;

}  // namespace rydlens::constants
