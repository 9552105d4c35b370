#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "posmom/probability.hpp"
#include "posmom/propagator.hpp"
#include "posmom/random.hpp"
#include "posmom/states.hpp"

namespace posmom {

// Measurement chain emulation: pixelated photon counting on the two-path
// density, then a weighted nonlinear fit of the same two-branch model, then
// interval probabilities extracted from the fitted continuous density. The
// point of going the long way round is that the headline probabilities come
// out of a fit to count data, not out of the simulator's own density.

struct FringeDataset {
  std::vector<double> positions;  // pixel centers, m, uniform spacing
  std::vector<double> counts;     // per pixel; integral when synthesized
  double total_counts = 0.0;
  double z = 0.0;  // propagation distance the profile was recorded at, m
  std::string label;
  double pixel_width = 0.0;  // m
};

struct FitResult {
  double visibility = 0.0;
  double center = 0.0;      // m
  double amplitude = 0.0;   // counts per unit density
  double background = 0.0;  // counts
  std::array<double, 2> width_params{0.0, 0.0};  // slit arm, sinc arm, m
  double rms_residual = 0.0;  // counts, unweighted
  bool converged = false;
};

// slit-arm profile used by the fit model; the hard-edged box is the physical
// aperture, the Gaussian is its rms-matched stand-in (sigma = w/sqrt(12))
// whose edges a damped least-squares step can differentiate through
enum class SlitModel { box, gaussian };

// which plane the dataset was recorded in; focal-plane coordinates are a
// scaled momentum axis, so widths fitted there map back by w -> f lambda / w
enum class FringePlane { position, focal };

struct FitConfig {
  SlitModel slit_model = SlitModel::gaussian;
  FringePlane plane = FringePlane::position;
  double z = 0.0;  // m; 0 for source-plane and focal-plane profiles
  PhotonContext ctx;
  double init_w1 = 0.0;  // required, m
  double init_w2 = 0.0;  // required, m
  std::size_t max_iterations = 500;
  double rel_tol = 1e-8;
};

inline FringeDataset synthesize_fringe(const std::vector<double>& density,
                                       const Grid& density_grid,
                                       const Grid& pixels, double n_photons,
                                       std::uint64_t seed, double z = 0.0,
                                       std::string label = {}) {
  validate(density_grid, "synthesize_fringe");
  validate(pixels, "synthesize_fringe");
  if (density.size() != density_grid.n_points) {
    throw invalid_argument("synthesize_fringe: density length does not match its grid");
  }
  if (!(n_photons >= 1.0)) {
    throw invalid_argument("synthesize_fringe: need at least one photon");
  }
  double total = 0.0;
  for (double v : density) total += v;
  total *= density_grid.dx;
  if (std::abs(total - 1.0) > 1e-6) {
    throw invalid_argument("synthesize_fringe: density is not normalized");
  }

  FringeDataset out;
  out.positions = pixels.positions();
  out.counts.resize(pixels.n_points);
  out.pixel_width = pixels.dx;
  out.z = z;
  out.label = std::move(label);
  Rng rng(seed);
  for (std::size_t i = 0; i < pixels.n_points; ++i) {
    const double xc = out.positions[i];
    // clip to the simulated support; the density is normalized there, so a
    // pixel hanging over the edge just sees zero outside
    const double lo = std::max(xc - pixels.dx / 2.0, density_grid.x_min);
    const double hi = std::min(xc + pixels.dx / 2.0, density_grid.x_max());
    const double p =
        lo < hi ? detail::integrate_window(density, density_grid.x_min,
                                           density_grid.dx, lo, hi)
                : 0.0;
    const double c = static_cast<double>(rng.poisson(n_photons * p));
    out.counts[i] = c;
    out.total_counts += c;
  }
  return out;
}

namespace detail {

// slit-arm amplitude at offset u from the fringe center, unit L2 norm
inline cdouble slit_arm_amplitude(double u, double w1, SlitModel slit,
                                  double t, const PhotonContext& ctx) {
  if (slit == SlitModel::box) {
    if (t == 0.0) {
      return std::abs(u) <= w1 / 2.0 ? cdouble{1.0 / std::sqrt(w1), 0.0}
                                     : cdouble{0.0, 0.0};
    }
    // far-field closed form; only valid past t = m w1^2 / h
    if (!(t > ctx.effective_mass * w1 * w1 / ctx.planck_h)) {
      return cdouble{std::numeric_limits<double>::quiet_NaN(), 0.0};
    }
    const double m = ctx.effective_mass;
    const double amp = std::sqrt(m * w1 / (2.0 * constants::pi * ctx.hbar * t));
    const double mod = amp * sinc(m * w1 * u / (2.0 * ctx.hbar * t));
    const double phase = m * u * u / (2.0 * ctx.hbar * t) - constants::pi / 4.0;
    return mod * cdouble{std::cos(phase), std::sin(phase)};
  }
  const double sigma = w1 / std::sqrt(12.0);
  const double pref = std::pow(2.0 * constants::pi * sigma * sigma, -0.25);
  if (t == 0.0) {
    return cdouble{pref * std::exp(-u * u / (4.0 * sigma * sigma)), 0.0};
  }
  // spreading Gaussian, exact at every t
  const cdouble stretch{1.0, ctx.hbar * t / (2.0 * ctx.effective_mass * sigma * sigma)};
  return pref / std::sqrt(stretch) *
         std::exp(-u * u / (4.0 * sigma * sigma * stretch));
}

// stationary sinc arm with first zero at w2, unit L2 norm
inline double sinc_arm_amplitude(double u, double w2) {
  return sinc(constants::pi * u / w2) / std::sqrt(w2);
}

inline double fringe_model_density(double u, double V, double w1, double w2,
                                   SlitModel slit, double t,
                                   const PhotonContext& ctx) {
  const cdouble a = slit_arm_amplitude(u, w1, slit, t, ctx);
  const double b = sinc_arm_amplitude(u, w2);
  return std::norm(a) + b * b + 2.0 * V * a.real() * b;
}

inline constexpr int kPixelSubsamples = 8;

// pixel-integrated model: theta = (A, x0, V, bg, w1, w2)
inline void fringe_model_counts(const std::vector<double>& positions,
                                double pixel_width,
                                const Eigen::VectorXd& theta, SlitModel slit,
                                double t, const PhotonContext& ctx,
                                std::vector<double>& out) {
  const double A = theta[0];
  const double x0 = theta[1];
  const double V = theta[2];
  const double bg = theta[3];
  const double w1 = std::abs(theta[4]);
  const double w2 = std::abs(theta[5]);
  out.resize(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    double acc = 0.0;
    for (int s = 0; s < kPixelSubsamples; ++s) {
      const double x = positions[i] - pixel_width / 2.0 +
                       (s + 0.5) * pixel_width / kPixelSubsamples;
      acc += fringe_model_density(x - x0, V, w1, w2, slit, t, ctx);
    }
    out[i] = A * (acc / kPixelSubsamples) + bg;
  }
}

}  // namespace detail

inline FitResult fit_fringe(const FringeDataset& data, const FitConfig& config) {
  const std::size_t n = data.positions.size();
  if (n < 6 || data.counts.size() != n) {
    throw invalid_argument("fit_fringe: need at least 6 pixels with matching counts");
  }
  if (!(data.pixel_width > 0.0)) {
    throw invalid_argument("fit_fringe: pixel_width must be positive");
  }
  if (!(config.init_w1 > 0.0) || !(config.init_w2 > 0.0)) {
    throw invalid_argument("fit_fringe: init_w1 and init_w2 must be positive");
  }
  if (!(config.z >= 0.0)) throw invalid_argument("fit_fringe: z must be non-negative");
  const double t = z_to_t(config.z, config.ctx);

  double c_min = data.counts[0];
  double c_max = data.counts[0];
  double c_sum = 0.0;
  for (double c : data.counts) {
    c_min = std::min(c_min, c);
    c_max = std::max(c_max, c);
    c_sum += c;
  }
  if (!(c_max > c_min)) {
    throw degenerate_fit("fit_fringe: counts carry no structure");
  }

  // deterministic data-driven start: count-weighted center, floor as
  // background, half visibility, amplitude from the total above background
  // (the two unit-norm branches integrate to about 2)
  double wsum = 0.0, xw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = data.counts[i] - c_min;
    wsum += w;
    xw += w * data.positions[i];
  }
  if (!(wsum > 0.0)) throw degenerate_fit("fit_fringe: counts carry no structure");

  Eigen::VectorXd theta(6);
  theta << std::max((c_sum - c_min * static_cast<double>(n)) *
                        data.pixel_width / 2.0,
                    1e-12),
      xw / wsum, 0.5, c_min, config.init_w1, config.init_w2;

  // parameter scales freeze the meaning of "relative" for steps and
  // finite-difference increments
  Eigen::VectorXd scale(6);
  scale << std::max(theta[0], 1e-12), std::max(std::abs(theta[1]), data.pixel_width),
      1.0, std::max(theta[3], 1.0), config.init_w1, config.init_w2;

  std::vector<double> model;
  const auto chi2_of = [&](const Eigen::VectorXd& th,
                           std::vector<double>& m_out) {
    detail::fringe_model_counts(data.positions, data.pixel_width, th,
                                config.slit_model, t, config.ctx, m_out);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(m_out[i])) return std::numeric_limits<double>::infinity();
      const double r = m_out[i] - data.counts[i];
      acc += r * r / std::max(data.counts[i], 1.0);
    }
    return acc;
  };

  double chi2 = chi2_of(theta, model);
  if (!std::isfinite(chi2)) {
    throw degenerate_fit("fit_fringe: model undefined at the initial guess");
  }

  double lambda = 1e-3;
  bool converged = false;
  Eigen::MatrixXd J(n, 6);
  std::vector<double> model_p;
  for (std::size_t iter = 0; iter < config.max_iterations && !converged; ++iter) {
    // finite-difference Jacobian of the weighted residuals
    for (int j = 0; j < 6; ++j) {
      Eigen::VectorXd th = theta;
      const double h = 1e-6 * std::max(std::abs(th[j]), scale[j]);
      th[j] += h;
      detail::fringe_model_counts(data.positions, data.pixel_width, th,
                                  config.slit_model, t, config.ctx, model_p);
      for (std::size_t i = 0; i < n; ++i) {
        const double wi = 1.0 / std::sqrt(std::max(data.counts[i], 1.0));
        J(static_cast<Eigen::Index>(i), j) = (model_p[i] - model[i]) / h * wi;
      }
    }
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = 1.0 / std::sqrt(std::max(data.counts[i], 1.0));
      r[static_cast<Eigen::Index>(i)] = (model[i] - data.counts[i]) * wi;
    }
    const Eigen::MatrixXd H = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      Eigen::MatrixXd Hd = H;
      for (int j = 0; j < 6; ++j) {
        Hd(j, j) += lambda * std::max(H(j, j), 1e-30);
      }
      const Eigen::VectorXd delta = Hd.ldlt().solve(-g);
      double rel = 0.0;
      for (int j = 0; j < 6; ++j) {
        rel = std::max(rel, std::abs(delta[j]) / std::max(std::abs(theta[j]), scale[j]));
      }
      if (rel < config.rel_tol) {
        // the damped step has shrunk below tolerance: a stationary point
        converged = true;
        break;
      }
      const Eigen::VectorXd th_new = theta + delta;
      const double chi2_new = chi2_of(th_new, model_p);
      if (chi2_new < chi2) {
        theta = th_new;
        chi2 = chi2_new;
        model.swap(model_p);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel < config.rel_tol) converged = true;
      } else {
        lambda = std::min(lambda * 10.0, 1e14);
      }
    }
    if (!accepted && !converged) break;  // damping exhausted
  }

  FitResult res;
  res.amplitude = theta[0];
  res.center = theta[1];
  res.visibility = std::clamp(theta[2], 0.0, 1.0);
  res.background = theta[3];
  res.width_params = {std::abs(theta[4]), std::abs(theta[5])};
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = model[i] - data.counts[i];
    ss += d * d;
  }
  res.rms_residual = std::sqrt(ss / static_cast<double>(n));
  res.converged = converged;
  return res;
}

// Interval probabilities from a fitted profile. The fitted widths fix the
// two branches, the fitted visibility fixes the cross term, and the design
// geometry fixes the windows; the numbers are then produced by the same
// machinery as the direct simulation, on a grid sized for the fitted state.
inline IntervalProbabilityReport probabilities_from_fit(
    const FitResult& fit, const FitConfig& config,
    const ExperimentParams& params) {
  if (!fit.converged) {
    throw invalid_argument("probabilities_from_fit: fit did not converge");
  }
  double w1 = fit.width_params[0];
  double w2 = fit.width_params[1];
  if (config.plane == FringePlane::focal) {
    // focal-plane widths are Fourier duals of the source-plane ones
    const double fl = params.focal_f * config.ctx.wavelength;
    const double w1_src = fl / w2;
    const double w2_src = fl / w1;
    w1 = w1_src;
    w2 = w2_src;
  }
  if (!(w1 > 0.0) || !(w2 > 0.0)) {
    throw invalid_argument("probabilities_from_fit: fitted widths must be positive");
  }
  const double B_hat = config.ctx.planck_h / w2;
  const Grid grid = auto_grid(w1, B_hat);

  const WaveFunction psi_slit =
      config.slit_model == SlitModel::box
          ? box_position_state(w1, grid)
          : gaussian_position_state(w1 / std::sqrt(12.0), grid);
  const WaveFunction psi_sinc = sinc_momentum_state(B_hat, grid);
  const double V = fit.visibility;

  const auto rho0 = visibility_density(psi_slit, psi_sinc, V);
  const double p_L = interval_probability(rho0, grid, -params.slit_L / 2.0,
                                          params.slit_L / 2.0);

  const auto phi_slit = to_momentum_representation(psi_slit);
  const auto phi_sinc = to_momentum_representation(psi_sinc);
  const auto rho_p = visibility_density_momentum(phi_slit, phi_sinc, V);
  const double p_B = detail::integrate_window(
      rho_p, phi_slit.p_values.front(), phi_slit.dp, -params.momentum_B / 2.0,
      params.momentum_B / 2.0);

  const double t =
      config.plane == FringePlane::focal ? 0.0 : z_to_t(config.z, config.ctx);
  double p_M;
  const double Mw = m_width(params.slit_L, params.momentum_B, t, config.ctx);
  if (t == 0.0) {
    p_M = interval_probability(rho0, grid, -Mw / 2.0, Mw / 2.0);
  } else {
    const auto evolved_slit = free_propagate(psi_slit, t, config.ctx);
    const auto evolved_sinc = free_propagate(psi_sinc, t, config.ctx);
    const auto rho_t = visibility_density(evolved_slit, evolved_sinc, V);
    const double lo = std::max(-Mw / 2.0, grid.x_min);
    const double hi = std::min(Mw / 2.0, grid.x_max());
    p_M = detail::integrate_window(rho_t, grid.x_min, grid.dx, lo, hi);
  }
  return defect_probability(p_L, p_B, std::min(p_M, 1.0), t, Mw, V, params,
                            config.ctx);
}

}  // namespace posmom
