#pragma once

// SI defining constants (exact by definition since the 2019 redefinition).
// Everything in this library is SI internally; unit conversion happens only
// at the CLI boundary.

namespace posmom::constants {

inline constexpr double planck_h = 6.62607015e-34;  // J s
inline constexpr double light_speed = 299792458.0;  // m/s
inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double hbar = planck_h / (2.0 * pi);

}  // namespace posmom::constants
