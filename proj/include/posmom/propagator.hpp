#pragma once

#include <cmath>

#include "posmom/fourier.hpp"
#include "posmom/photon.hpp"
#include "posmom/states.hpp"

namespace posmom {

struct PropagateOptions {
  // Fraction of the norm allowed in the outermost 1 percent of momentum
  // bins before the spectral method is declared untrustworthy. States with
  // sharp edges have 1/p^2 momentum tails, so a few 1e-4 near the Nyquist
  // edge is normal on a well-sized grid; crossing this threshold means the
  // grid is genuinely too coarse.
  double aliasing_threshold = 1e-2;

  // Zero-pad factor for a guard band around the grid. The default 1 keeps
  // the evolution exactly unitary on the periodic domain, which the
  // composition and time-reversal guarantees rely on. Factors >= 2 push
  // periodic images away for one-shot transport over long distances; the
  // cropped result is renormalized and is no longer exactly composable.
  std::size_t guard_factor = 1;
};

namespace detail {

inline double outer_bin_fraction(const std::vector<cdouble>& spec) {
  const std::size_t n = spec.size();
  double total = 0.0, outer = 0.0;
  const double edge = 0.495 * static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::norm(spec[k]);
    total += w;
    if (std::abs(signed_frequency_index(k, n)) >= edge) outer += w;
  }
  return total > 0.0 ? outer / total : 0.0;
}

}  // namespace detail

// Exact free evolution: multiply the momentum representation by
// exp(-i p^2 t / 2 m hbar) and transform back. Norm-preserving for any t,
// negative times included (the phase is just conjugated).
inline WaveFunction free_propagate(const WaveFunction& psi, double t,
                                   const PhotonContext& ctx,
                                   const PropagateOptions& opts = {}) {
  validate(psi.grid, "free_propagate");
  if (!std::isfinite(t)) throw invalid_argument("free_propagate: t must be finite");
  if (opts.guard_factor < 1) throw invalid_argument("free_propagate: guard_factor must be >= 1");

  const std::size_t n = psi.grid.n_points;
  const std::size_t npad = n * opts.guard_factor;
  const std::size_t off = (npad - n) / 2;

  std::vector<cdouble> buf(npad, cdouble{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) buf[off + i] = psi.amplitudes[i];

  std::vector<cdouble> spec = fft_forward(buf);
  if (detail::outer_bin_fraction(spec) > opts.aliasing_threshold) {
    throw aliasing_risk("free_propagate: outermost momentum bins carry too much norm");
  }

  const double c = t / (2.0 * ctx.effective_mass * ctx.hbar);
  for (std::size_t k = 0; k < npad; ++k) {
    const double p = momentum_at(k, npad, psi.grid.dx);
    const double phase = -c * p * p;
    spec[k] *= cdouble{std::cos(phase), std::sin(phase)};
  }
  std::vector<cdouble> evolved = fft_inverse(spec);

  WaveFunction out{psi.grid, std::vector<cdouble>(n)};
  for (std::size_t i = 0; i < n; ++i) out.amplitudes[i] = evolved[off + i];

  if (opts.guard_factor > 1) {
    // amplitude that walked into the guard band is discarded by the crop;
    // rescale so the caller keeps a state of the original norm
    const double want = norm(psi);
    const double have = norm(out);
    if (!(have > 0.0)) throw aliasing_risk("free_propagate: guard band swallowed the state");
    const double s = want / have;
    for (auto& a : out.amplitudes) a *= s;
  }
  return out;
}

// Focal-plane field of an ideal thin lens one focal length downstream: the
// momentum amplitude at p lands at x' = f p / p_total, carrying the
// Jacobian sqrt(p_total/f) so the density integrates the same way. The
// residual quadratic phase across the focal plane is dropped; only
// densities are consumed downstream.
inline WaveFunction lens_fourier_map(const WaveFunction& psi, double f,
                                     const PhotonContext& ctx,
                                     double aliasing_threshold = 1e-2) {
  validate(psi.grid, "lens_fourier_map");
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw invalid_argument("lens_fourier_map: focal length must be positive and finite");
  }
  {
    std::vector<cdouble> spec = fft_forward(psi.amplitudes);
    if (detail::outer_bin_fraction(spec) > aliasing_threshold) {
      throw invalid_grid("lens_fourier_map: grid too coarse to resolve the mapped profile");
    }
  }
  MomentumWaveFunction mom = to_momentum_representation(psi);
  const double scale_x = f / ctx.total_momentum;       // x' per unit momentum
  const double jac = std::sqrt(1.0 / scale_x);
  const std::size_t n = mom.amplitudes.size();
  WaveFunction out;
  out.grid = Grid{mom.p_values.front() * scale_x, n, mom.dp * scale_x};
  out.amplitudes.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.amplitudes[j] = mom.amplitudes[j] * jac;
  return out;
}

}  // namespace posmom
