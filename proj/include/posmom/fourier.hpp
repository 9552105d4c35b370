#pragma once

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "posmom/wavefunction.hpp"

namespace posmom {

// Thin wrappers over the kissfft backend. Forward is the plain unscaled
// DFT, inverse carries the 1/n. Plans are rebuilt per call; twiddle setup
// is linear in n and negligible next to the transform itself.

inline std::vector<cdouble> fft_forward(const std::vector<cdouble>& in) {
  Eigen::FFT<double> fft;
  std::vector<cdouble> out;
  fft.fwd(out, in);
  return out;
}

inline std::vector<cdouble> fft_inverse(const std::vector<cdouble>& in) {
  Eigen::FFT<double> fft;
  std::vector<cdouble> out;
  fft.inv(out, in);
  return out;
}

// signed DFT frequency index: 0, 1, ..., n/2-1, -n/2, ..., -1
inline double signed_frequency_index(std::size_t k, std::size_t n) {
  return (k < (n + 1) / 2) ? static_cast<double>(k)
                           : static_cast<double>(k) - static_cast<double>(n);
}

// momentum sample for DFT bin k on a grid of spacing dx
inline double momentum_at(std::size_t k, std::size_t n, double dx) {
  return 2.0 * constants::pi * constants::hbar * signed_frequency_index(k, n) /
         (static_cast<double>(n) * dx);
}

// Momentum-space amplitudes on the physically ordered p grid (most
// negative first, p = 0 at index n/2). Units (kg m/s)^(-1/2); the scaling
// dx/sqrt(2 pi hbar) together with dp = 2 pi hbar/(n dx) makes Parseval
// exact: sum |phi|^2 dp = sum |psi|^2 dx identically.
struct MomentumWaveFunction {
  std::vector<double> p_values;
  std::vector<cdouble> amplitudes;
  double dp = 0.0;
};

inline double norm_squared(const MomentumWaveFunction& phi) {
  double acc = 0.0;
  for (const auto& a : phi.amplitudes) acc += std::norm(a);
  return acc * phi.dp;
}

inline MomentumWaveFunction to_momentum_representation(const WaveFunction& psi) {
  const std::size_t n = psi.grid.n_points;
  const double dx = psi.grid.dx;
  std::vector<cdouble> spec = fft_forward(psi.amplitudes);

  // continuum convention: phi(p) = (2 pi hbar)^(-1/2) * integral psi(x) e^(-ipx/hbar) dx.
  // The DFT references x to index 0, so each bin picks up e^(-i p x_min / hbar).
  const double scale = dx / std::sqrt(2.0 * constants::pi * constants::hbar);
  MomentumWaveFunction out;
  out.dp = 2.0 * constants::pi * constants::hbar / (static_cast<double>(n) * dx);
  out.p_values.resize(n);
  out.amplitudes.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = (j + n / 2) % n;  // physical order -> DFT order
    const double p = momentum_at(k, n, dx);
    const double ph = -p * psi.grid.x_min / constants::hbar;
    out.p_values[j] = p;
    out.amplitudes[j] = spec[k] * scale * cdouble{std::cos(ph), std::sin(ph)};
  }
  return out;
}

}  // namespace posmom
