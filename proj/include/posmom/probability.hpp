#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "posmom/fourier.hpp"
#include "posmom/photon.hpp"
#include "posmom/wavefunction.hpp"

namespace posmom {

// One evaluation of the straight-line bound: the probability of finding
// the particle initially inside L, initially inside B, and at time t
// inside the grown window M = L + Bt/m. bound_rhs and defect are kept
// unclamped; a negative bound_rhs just means the inequality is vacuous
// there.
struct IntervalProbabilityReport {
  double p_L = 0.0;
  double p_B = 0.0;
  double p_M = 0.0;
  double bound_rhs = 0.0;  // p_L + p_B - 1
  double defect = 0.0;     // bound_rhs - p_M, positive certifies violation
  double t = 0.0;          // s
  double M_width = 0.0;    // m
  double visibility = 1.0;
};

namespace detail {

inline double clipped_cell_weight(double x, double dx, double a, double b) {
  const double covered = std::min(b, x + 0.5 * dx) - std::max(a, x - 0.5 * dx);
  return std::clamp(covered / dx, 0.0, 1.0);
}

// sum of rho over [a,b] with partial end cells weighted by covered area
inline double integrate_window(const std::vector<double>& rho, double x0,
                               double dx, double a, double b) {
  double acc = 0.0;
  // only cells intersecting [a,b] contribute; find the index range
  const auto n = static_cast<std::ptrdiff_t>(rho.size());
  auto lo = static_cast<std::ptrdiff_t>(std::floor((a - x0) / dx - 0.5));
  auto hi = static_cast<std::ptrdiff_t>(std::ceil((b - x0) / dx + 0.5));
  lo = std::max<std::ptrdiff_t>(0, lo);
  hi = std::min(n - 1, hi);
  for (std::ptrdiff_t i = lo; i <= hi; ++i) {
    const double x = x0 + static_cast<double>(i) * dx;
    acc += rho[static_cast<std::size_t>(i)] * clipped_cell_weight(x, dx, a, b);
  }
  return acc * dx;
}

}  // namespace detail

// integral of a density sampled on a grid over [a,b]
inline double interval_probability(const std::vector<double>& rho,
                                   const Grid& grid, double a, double b) {
  validate(grid, "interval_probability");
  if (!(a < b)) throw invalid_argument("interval_probability: need a < b");
  if (a < grid.x_min - 0.5 * grid.dx || b > grid.x_max() + 0.5 * grid.dx) {
    throw invalid_argument("interval_probability: interval outside the grid");
  }
  return detail::integrate_window(rho, grid.x_min, grid.dx, a, b);
}

inline double interval_probability(const WaveFunction& psi, double a, double b) {
  return interval_probability(density(psi), psi.grid, a, b);
}

inline double momentum_interval_probability(const MomentumWaveFunction& phi,
                                            double p_lo, double p_hi) {
  if (!(p_lo < p_hi)) throw invalid_argument("momentum_interval_probability: need p_lo < p_hi");
  if (phi.amplitudes.size() < 2) throw invalid_argument("momentum_interval_probability: empty spectrum");
  if (p_lo < phi.p_values.front() - 0.5 * phi.dp ||
      p_hi > phi.p_values.back() + 0.5 * phi.dp) {
    throw invalid_argument("momentum_interval_probability: interval outside the momentum grid");
  }
  std::vector<double> rho(phi.amplitudes.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(phi.amplitudes[i]);
  return detail::integrate_window(rho, phi.p_values.front(), phi.dp, p_lo, p_hi);
}

// probability of |p| < B/2 for a position-space state
inline double momentum_interval_probability(const WaveFunction& psi, double B) {
  if (!(B > 0.0)) throw invalid_argument("momentum_interval_probability: B must be positive");
  return momentum_interval_probability(to_momentum_representation(psi), -B / 2.0, B / 2.0);
}

// window a straight-line walker must stay in: M(t) = L + B t / m
inline double m_width(double L, double B, double t, const PhotonContext& ctx) {
  if (!(t >= 0.0)) throw invalid_argument("m_width: t must be non-negative");
  return L + B * t / ctx.effective_mass;
}

inline double bound_rhs(double p_L, double p_B) {
  // quadrature may overshoot unity by rounding, hence the 1e-9 headroom
  if (!(p_L >= 0.0 && p_L <= 1.0 + 1e-9) || !(p_B >= 0.0 && p_B <= 1.0 + 1e-9)) {
    throw invalid_argument("bound_rhs: probabilities must lie in [0,1]");
  }
  return p_L + p_B - 1.0;
}

// Assembles the report and cross-checks that the window actually is the
// straight-line window for (L, B, t); a mismatched pairing invalidates the
// inequality, so it is rejected rather than reported.
inline IntervalProbabilityReport defect_probability(
    double p_L, double p_B, double p_M, double t, double M_width,
    double visibility, const ExperimentParams& params, const PhotonContext& ctx) {
  for (double p : {p_L, p_B, p_M}) {
    if (!(p >= 0.0 && p <= 1.0 + 1e-9)) {
      throw invalid_argument("defect_probability: probabilities must lie in [0,1]");
    }
  }
  const double expect = m_width(params.slit_L, params.momentum_B, t, ctx);
  if (std::abs(M_width - expect) > 1e-9 * expect) {
    throw invalid_argument("defect_probability: M_width inconsistent with L + Bt/m");
  }
  IntervalProbabilityReport r;
  r.p_L = p_L;
  r.p_B = p_B;
  r.p_M = p_M;
  r.bound_rhs = bound_rhs(p_L, p_B);
  r.defect = r.bound_rhs - p_M;
  r.t = t;
  r.M_width = M_width;
  r.visibility = visibility;
  return r;
}

// Density of the two-path state under reduced interference contrast,
//
//   rho_V  proportional to  |psi_L|^2 + |psi_B|^2 + 2 V Re(conj(psi_L) psi_B),
//
// renormalized to unit integral on the grid. V = 1 is the pure
// superposition, V = 0 the even incoherent mixture; dephasing between the
// two arms only ever scales the cross term, which is why one parameter
// captures the measured fringe contrast.
inline std::vector<double> visibility_density(const WaveFunction& psi_L,
                                              const WaveFunction& psi_B,
                                              double V) {
  require_same_grid(psi_L, psi_B, "visibility_density");
  if (!(V >= 0.0 && V <= 1.0)) {
    throw invalid_argument("visibility_density: V must lie in [0,1]");
  }
  std::vector<double> rho(psi_L.amplitudes.size());
  double total = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const cdouble a = psi_L.amplitudes[i];
    const cdouble b = psi_B.amplitudes[i];
    rho[i] = std::norm(a) + std::norm(b) + 2.0 * V * (std::conj(a) * b).real();
    total += rho[i];
  }
  total *= psi_L.grid.dx;
  if (!(total > 0.0)) throw degenerate_superposition("visibility_density: density sums to zero");
  for (auto& v : rho) v /= total;
  return rho;
}

// momentum-side counterpart, density over the physically ordered p grid
inline std::vector<double> visibility_density_momentum(
    const MomentumWaveFunction& phi_L, const MomentumWaveFunction& phi_B, double V) {
  if (phi_L.amplitudes.size() != phi_B.amplitudes.size() || phi_L.dp != phi_B.dp) {
    throw invalid_argument("visibility_density_momentum: spectra live on different grids");
  }
  if (!(V >= 0.0 && V <= 1.0)) {
    throw invalid_argument("visibility_density_momentum: V must lie in [0,1]");
  }
  std::vector<double> rho(phi_L.amplitudes.size());
  double total = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const cdouble a = phi_L.amplitudes[i];
    const cdouble b = phi_B.amplitudes[i];
    rho[i] = std::norm(a) + std::norm(b) + 2.0 * V * (std::conj(a) * b).real();
    total += rho[i];
  }
  total *= phi_L.dp;
  if (!(total > 0.0)) throw degenerate_superposition("visibility_density_momentum: density sums to zero");
  for (auto& v : rho) v /= total;
  return rho;
}

}  // namespace posmom
