#pragma once

#include <algorithm>
#include <cmath>

#include "posmom/photon.hpp"
#include "posmom/wavefunction.hpp"

// The two pure states this laboratory is about, plus the far-field closed
// form of the freely evolved slit state and the superposition that mixes
// position with momentum localization.

namespace posmom {

// sin(u)/u with the removable singularity handled by series. The series
// switch at |u| < 1e-4 keeps the error below 1e-17.
inline double sinc(double u) {
  if (std::abs(u) < 1e-4) {
    const double u2 = u * u;
    return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
  }
  return std::sin(u) / u;
}

namespace detail {

// fraction of cell [x-dx/2, x+dx/2] inside [lo, hi]
inline double cell_fraction(double x, double dx, double lo, double hi) {
  const double covered = std::min(hi, x + 0.5 * dx) - std::max(lo, x - 0.5 * dx);
  return std::clamp(covered / dx, 0.0, 1.0);
}

inline double renormalize_with_deficit(WaveFunction& psi, const char* where,
                                       double max_deficit) {
  const double n2 = norm_squared(psi);
  const double deficit = 1.0 - n2;
  if (deficit > max_deficit) {
    throw invalid_grid(std::string(where) +
                       ": grid truncates more than 1 percent of the state's norm");
  }
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& a : psi.amplitudes) a *= scale;
  return deficit;
}

}  // namespace detail

// Uniform amplitude 1/sqrt(L) over [-L/2, L/2]. Cells straddling a slit
// edge carry the covered fraction of the full amplitude, which keeps the
// interval integral over the slit exact; on grids where the edges fall on
// cell boundaries the construction is exact to machine precision.
inline WaveFunction box_position_state(double L, const Grid& grid) {
  validate(grid, "box_position_state");
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw invalid_argument("box_position_state: L must be positive and finite");
  }
  if (grid.x_min > -L / 2.0 || grid.x_max() < L / 2.0) {
    throw invalid_grid("box_position_state: grid does not span [-L/2, L/2]");
  }
  if (grid.dx > L / 8.0) {
    throw invalid_grid("box_position_state: fewer than 8 cells across the slit");
  }
  WaveFunction psi{grid, std::vector<cdouble>(grid.n_points)};
  const double amp = 1.0 / std::sqrt(L);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double f = detail::cell_fraction(grid.x(i), grid.dx, -L / 2.0, L / 2.0);
    psi.amplitudes[i] = amp * f;
  }
  detail::renormalize_with_deficit(psi, "box_position_state", 1e-2);
  return psi;
}

// Position wavefunction of a state whose momentum density is a box of
// width B: sqrt(B/2 pi hbar) * sinc(B x / 2 hbar). The 1/x tails carry
// real weight, so the grid must be wide; the constructor refuses grids
// that truncate more than 1 percent of the norm and renormalizes the rest
// away.
inline WaveFunction sinc_momentum_state(double B, const Grid& grid) {
  validate(grid, "sinc_momentum_state");
  if (!(B > 0.0) || !std::isfinite(B)) {
    throw invalid_argument("sinc_momentum_state: B must be positive and finite");
  }
  WaveFunction psi{grid, std::vector<cdouble>(grid.n_points)};
  const double amp = std::sqrt(B / (2.0 * constants::pi * constants::hbar));
  const double k = B / (2.0 * constants::hbar);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    psi.amplitudes[i] = amp * sinc(k * grid.x(i));
  }
  detail::renormalize_with_deficit(psi, "sinc_momentum_state", 1e-2);
  return psi;
}

// Far-field closed form of the freely evolved box state,
//
//   sqrt(mL/2 pi hbar t) * sinc(mLx/2 hbar t) * exp(i(m x^2/2 hbar t - pi/4)),
//
// valid once every point of the slit has diffracted across the whole
// pattern, t > m L^2 / (2 pi hbar). At t = t_M the modulus coincides with
// the sinc momentum state's. Renormalized on the grid exactly like the
// sinc constructor so the two stay comparable.
inline WaveFunction evolved_position_state(double L, double t,
                                           const PhotonContext& ctx,
                                           const Grid& grid) {
  validate(grid, "evolved_position_state");
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw invalid_argument("evolved_position_state: L must be positive and finite");
  }
  const double
      t_far = ctx.effective_mass * L * L / ctx.planck_h;  // = m L^2 / (2 pi hbar)
  if (!(t > t_far)) {
    throw domain_error("evolved_position_state: t inside the near-field bound L^2 m / h");
  }
  const double m = ctx.effective_mass;
  const double hb = ctx.hbar;
  const double amp = std::sqrt(m * L / (2.0 * constants::pi * hb * t));
  const double ksinc = m * L / (2.0 * hb * t);
  const double kchirp = m / (2.0 * hb * t);
  WaveFunction psi{grid, std::vector<cdouble>(grid.n_points)};
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double x = grid.x(i);
    const double mod = amp * sinc(ksinc * x);
    const double phase = kchirp * x * x - constants::pi / 4.0;
    psi.amplitudes[i] = mod * cdouble{std::cos(phase), std::sin(phase)};
  }
  detail::renormalize_with_deficit(psi, "evolved_position_state", 1e-2);
  return psi;
}

// Gaussian stand-in for the slit arm, rms-matched to a box of width w when
// sigma = w / sqrt(12). Used by fits that cannot stomach hard edges.
inline WaveFunction gaussian_position_state(double sigma, const Grid& grid) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw invalid_argument("gaussian_position_state: sigma must be positive and finite");
  }
  validate(grid, "gaussian_position_state");
  const double amp = std::pow(2.0 * constants::pi * sigma * sigma, -0.25);
  WaveFunction psi{grid, std::vector<cdouble>(grid.n_points)};
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double x = grid.x(i);
    psi.amplitudes[i] = amp * std::exp(-x * x / (4.0 * sigma * sigma));
  }
  detail::renormalize_with_deficit(psi, "gaussian_position_state", 1e-2);
  return psi;
}

// (psi_a + psi_b) / sqrt(2 (1 + <a|b>)). Both library constructors yield
// real amplitudes, so the overlap must come out real; a complex overlap
// signals the caller mixed in a propagated state, which this normalizer
// does not cover.
inline WaveFunction superposition(const WaveFunction& psi_a, const WaveFunction& psi_b) {
  require_same_grid(psi_a, psi_b, "superposition");
  const cdouble ov = overlap(psi_a, psi_b);
  if (std::abs(ov.imag()) > 1e-6) {
    throw invalid_argument("superposition: overlap has an imaginary part above 1e-6");
  }
  const double denom = 2.0 * (1.0 + ov.real());
  if (!(denom > 1e-12)) {
    throw degenerate_superposition("superposition: normalizer 2(1+<a|b>) is not positive");
  }
  const double scale = 1.0 / std::sqrt(denom);
  WaveFunction out{psi_a.grid, std::vector<cdouble>(psi_a.amplitudes.size())};
  for (std::size_t i = 0; i < out.amplitudes.size(); ++i) {
    out.amplitudes[i] = scale * (psi_a.amplitudes[i] + psi_b.amplitudes[i]);
  }
  return out;
}

}  // namespace posmom
