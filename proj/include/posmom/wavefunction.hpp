#pragma once

#include <complex>
#include <vector>

#include "posmom/errors.hpp"
#include "posmom/grid.hpp"

namespace posmom {

using cdouble = std::complex<double>;

// Complex amplitudes on a position grid, units m^(-1/2). Constructors in
// states.hpp return unit-norm values; nothing here re-checks that on every
// access, norm(psi) is the audit tool.
struct WaveFunction {
  Grid grid;
  std::vector<cdouble> amplitudes;
};

inline void require_same_grid(const WaveFunction& a, const WaveFunction& b,
                              const char* where) {
  if (!(a.grid == b.grid)) {
    throw invalid_argument(std::string(where) + ": wavefunctions live on different grids");
  }
  if (a.amplitudes.size() != b.amplitudes.size()) {
    throw invalid_argument(std::string(where) + ": amplitude counts differ");
  }
}

inline double norm_squared(const WaveFunction& psi) {
  double acc = 0.0;
  for (const auto& a : psi.amplitudes) acc += std::norm(a);
  return acc * psi.grid.dx;
}

inline double norm(const WaveFunction& psi) { return std::sqrt(norm_squared(psi)); }

inline void normalize(WaveFunction& psi) {
  const double n = norm(psi);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw invalid_argument("normalize: wavefunction has zero or non-finite norm");
  }
  for (auto& a : psi.amplitudes) a /= n;
}

// discrete <a|b> = sum conj(a_i) b_i dx
inline cdouble overlap(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a, b, "overlap");
  cdouble acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
    acc += std::conj(a.amplitudes[i]) * b.amplitudes[i];
  }
  return acc * a.grid.dx;
}

inline std::vector<double> density(const WaveFunction& psi) {
  std::vector<double> rho(psi.amplitudes.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi.amplitudes[i]);
  return rho;
}

}  // namespace posmom
