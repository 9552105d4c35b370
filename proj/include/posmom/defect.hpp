#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "posmom/probability.hpp"
#include "posmom/propagator.hpp"
#include "posmom/states.hpp"

namespace posmom {

// Defect sampled along propagation distance, z expressed in units of z_M.
struct DefectCurve {
  std::vector<double> scaled_z;
  std::vector<double> defect;
  double visibility = 1.0;
  ExperimentParams params;
};

struct OptimizationResult {
  double optimal_scaled_z = 0.0;
  double optimal_lb_fraction = 0.0;
  double max_defect = 0.0;
  double tolerance = 0.0;
  // set when the coarse scan saw more than one interior local maximum and
  // the search fell back to a fine scan before refining
  bool multimodal = false;
};

struct ViolationRange {
  double z_lo = 0.0;
  double z_hi = 0.0;
  bool empty = true;
  // the curve was already positive at its first (last) sample, so the true
  // crossing lies outside the sampled range
  bool lower_open = false;
  bool upper_open = false;
};

// Evaluates the straight-line bound for one parameter set. The two initial
// states and their spectra are built once; each probe of the curve then
// costs two inverse transforms. P(L) and P(B) are time-independent, so they
// are frozen at construction:
//   P(L)  window [-L/2, L/2] of the position density at t = 0
//   P(B)  window [-B/2, B/2] of the momentum density
// Both use the same visibility-weighted two-path density as P(M, t).
class DefectEvaluator {
 public:
  DefectEvaluator(const ExperimentParams& params, const PhotonContext& ctx,
                  double visibility, const Grid& grid)
      : params_(params), ctx_(ctx), visibility_(visibility), grid_(grid) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
      throw invalid_argument("DefectEvaluator: visibility must lie in [0,1]");
    }
    validate(grid_, "DefectEvaluator");
    psi_L_ = box_position_state(params_.slit_L, grid_);
    psi_B_ = sinc_momentum_state(params_.momentum_B, grid_);
    spec_L_ = fft_forward(psi_L_.amplitudes);
    spec_B_ = fft_forward(psi_B_.amplitudes);
    const std::size_t n = grid_.n_points;
    p_.resize(n);
    for (std::size_t k = 0; k < n; ++k) p_[k] = momentum_at(k, n, grid_.dx);

    const auto rho0 = visibility_density(psi_L_, psi_B_, visibility_);
    p_L_ = interval_probability(rho0, grid_, -params_.slit_L / 2.0,
                                params_.slit_L / 2.0);
    const auto phi_L = to_momentum_representation(psi_L_);
    const auto phi_B = to_momentum_representation(psi_B_);
    const auto rho_p = visibility_density_momentum(phi_L, phi_B, visibility_);
    p_B_ = detail::integrate_window(rho_p, phi_L.p_values.front(), phi_L.dp,
                                    -params_.momentum_B / 2.0,
                                    params_.momentum_B / 2.0);
    bound_ = bound_rhs(p_L_, p_B_);
  }

  DefectEvaluator(const ExperimentParams& params, const PhotonContext& ctx,
                  double visibility)
      : DefectEvaluator(params, ctx, visibility,
                        auto_grid(params.slit_L, params.momentum_B)) {}

  double p_position() const { return p_L_; }
  double p_momentum() const { return p_B_; }
  double bound() const { return bound_; }
  double visibility() const { return visibility_; }
  const Grid& grid() const { return grid_; }
  const ExperimentParams& params() const { return params_; }

  double p_M(double scaled_z) const {
    if (!(scaled_z >= 0.0) || !std::isfinite(scaled_z)) {
      throw invalid_argument("DefectEvaluator: scaled z must be finite and non-negative");
    }
    const double t = scaled_z * params_.t_M;
    const std::size_t n = grid_.n_points;
    const double c1 = t / (2.0 * ctx_.effective_mass * ctx_.hbar);
    std::vector<cdouble> sa(n), sb(n);
    for (std::size_t k = 0; k < n; ++k) {
      const cdouble ph = std::polar(1.0, -c1 * p_[k] * p_[k]);
      sa[k] = spec_L_[k] * ph;
      sb[k] = spec_B_[k] * ph;
    }
    const auto a = fft_inverse(sa);
    const auto b = fft_inverse(sb);
    std::vector<double> rho(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rho[i] = std::norm(a[i]) + std::norm(b[i]) +
               2.0 * visibility_ * (a[i] * std::conj(b[i])).real();
      total += rho[i];
    }
    total *= grid_.dx;
    for (auto& v : rho) v /= total;
    const double M = m_width(params_.slit_L, params_.momentum_B, t, ctx_);
    // the density is normalized on the grid, so clipping a window that has
    // outgrown the grid loses nothing
    const double lo = std::max(-M / 2.0, grid_.x_min);
    const double hi = std::min(M / 2.0, grid_.x_max());
    return detail::integrate_window(rho, grid_.x_min, grid_.dx, lo, hi);
  }

  double defect(double scaled_z) const { return bound_ - p_M(scaled_z); }

  IntervalProbabilityReport report(double scaled_z) const {
    const double t = scaled_z * params_.t_M;
    const double M = m_width(params_.slit_L, params_.momentum_B, t, ctx_);
    return defect_probability(p_L_, p_B_, p_M(scaled_z), t, M, visibility_,
                              params_, ctx_);
  }

 private:
  ExperimentParams params_;
  PhotonContext ctx_;
  double visibility_;
  Grid grid_;
  WaveFunction psi_L_;
  WaveFunction psi_B_;
  std::vector<cdouble> spec_L_;  // DFT order
  std::vector<cdouble> spec_B_;
  std::vector<double> p_;  // DFT order
  double p_L_ = 0.0;
  double p_B_ = 0.0;
  double bound_ = 0.0;
};

namespace detail {

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

// golden-section maximizer on [a,b], returns the midpoint of the final bracket
inline double golden_max(const std::function<double(double)>& fn, double a,
                         double b, double tol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while ((b - a) > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

// coarse scan then golden refinement; flags a fallback when the coarse scan
// is not unimodal
inline std::pair<double, bool> argmax_refined(
    const std::function<double(double)>& fn, double lo, double hi,
    std::size_t n_coarse, double tol) {
  auto grid_pts = linspace(lo, hi, n_coarse);
  std::vector<double> vals(grid_pts.size());
  for (std::size_t i = 0; i < grid_pts.size(); ++i) vals[i] = fn(grid_pts[i]);
  std::size_t n_local = 0;
  for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
    if (vals[i] > vals[i - 1] && vals[i] > vals[i + 1]) ++n_local;
  }
  bool multimodal = n_local > 1;
  if (multimodal) {
    grid_pts = linspace(lo, hi, 8 * n_coarse);
    vals.resize(grid_pts.size());
    for (std::size_t i = 0; i < grid_pts.size(); ++i) vals[i] = fn(grid_pts[i]);
  }
  const std::size_t i0 = static_cast<std::size_t>(
      std::max_element(vals.begin(), vals.end()) - vals.begin());
  const double a = grid_pts[i0 == 0 ? 0 : i0 - 1];
  const double b = grid_pts[std::min(grid_pts.size() - 1, i0 + 1)];
  return {golden_max(fn, a, b, tol), multimodal};
}

}  // namespace detail

// The numerical propagator is exact at any t, but the analytic checkpoints
// and the window narrative both live in the far field, so curve probes are
// restricted to z > L^2/lambda. In scaled units that threshold is exactly
// lb_fraction, since (L^2/lambda) / z_M = L B / (2 pi hbar).
inline void require_far_field(double scaled_z, const ExperimentParams& params,
                              const char* where) {
  if (!(scaled_z > params.lb_fraction)) {
    throw domain_error(std::string(where) +
                       ": scaled z must exceed the far-field threshold");
  }
}

inline DefectCurve defect_curve(const ExperimentParams& params,
                                const PhotonContext& ctx,
                                const std::vector<double>& scaled_z,
                                double visibility, const Grid& grid) {
  if (scaled_z.empty()) throw invalid_argument("defect_curve: no z points");
  for (std::size_t i = 0; i < scaled_z.size(); ++i) {
    if (!std::isfinite(scaled_z[i])) {
      throw invalid_argument("defect_curve: z points must be finite");
    }
    if (i > 0 && !(scaled_z[i] > scaled_z[i - 1])) {
      throw invalid_argument("defect_curve: z points must be strictly increasing");
    }
    require_far_field(scaled_z[i], params, "defect_curve");
  }
  DefectEvaluator ev(params, ctx, visibility, grid);
  DefectCurve curve;
  curve.scaled_z = scaled_z;
  curve.defect.reserve(scaled_z.size());
  for (double z : scaled_z) curve.defect.push_back(ev.defect(z));
  curve.visibility = visibility;
  curve.params = params;
  return curve;
}

inline DefectCurve defect_curve(const ExperimentParams& params,
                                const PhotonContext& ctx,
                                const std::vector<double>& scaled_z,
                                double visibility) {
  return defect_curve(params, ctx, scaled_z, visibility,
                      auto_grid(params.slit_L, params.momentum_B));
}

// search window for the optimal time, in units of z_M
inline constexpr double kOptimalTimeLo = 0.5;
inline constexpr double kOptimalTimeHi = 10.0;
inline constexpr std::size_t kOptimalTimeCoarse = 50;
inline constexpr double kOptimalTimeTol = 1e-4;

inline OptimizationResult find_optimal_time(const ExperimentParams& params,
                                            const PhotonContext& ctx,
                                            double visibility) {
  require_far_field(kOptimalTimeLo, params, "find_optimal_time");
  DefectEvaluator ev(params, ctx, visibility);
  auto [z_opt, multimodal] = detail::argmax_refined(
      [&](double z) { return ev.defect(z); }, kOptimalTimeLo, kOptimalTimeHi,
      kOptimalTimeCoarse, kOptimalTimeTol);
  OptimizationResult r;
  r.optimal_scaled_z = z_opt;
  r.optimal_lb_fraction = params.lb_fraction;
  r.max_defect = ev.defect(z_opt);
  r.tolerance = kOptimalTimeTol;
  r.multimodal = multimodal;
  return r;
}

inline constexpr double kOptimalProductTol = 5e-4;

// Maximizes the peak defect over the dimensionless product L*B/(2 pi hbar).
// The slit width is held at a fixed reference and only B varies, so a single
// grid (sized for the smallest B, which needs the widest window) serves the
// whole sweep; the defect depends on (L, B) only through the product.
inline OptimizationResult find_optimal_product(const PhotonContext& ctx,
                                               double lb_lo = 0.01,
                                               double lb_hi = 0.05,
                                               double visibility = 1.0) {
  if (!(lb_lo > 0.0) || !(lb_hi > lb_lo)) {
    throw invalid_argument("find_optimal_product: invalid lb range");
  }
  if (lb_lo > 0.01 + 1e-12 || lb_hi < 0.05 - 1e-12) {
    throw invalid_argument("find_optimal_product: range must include [0.01, 0.05]");
  }
  const double L_ref = 47e-6;
  const double f_ref = 0.1;
  const auto B_of = [&](double lb) { return lb * ctx.planck_h / L_ref; };
  const Grid grid = auto_grid(L_ref, B_of(lb_lo));

  struct Point {
    double d_star;
    double z_star;
    bool multimodal;
  };
  std::map<std::int64_t, Point> cache;
  const auto peak_at = [&](double lb) -> Point {
    const auto key = static_cast<std::int64_t>(std::llround(lb * 1e6));
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const double lb_q = static_cast<double>(key) * 1e-6;
    const double Lp = lb_q * f_ref * ctx.wavelength / L_ref;
    const auto params = make_params(L_ref, Lp, f_ref, ctx);
    DefectEvaluator ev(params, ctx, visibility, grid);
    auto [z_opt, multimodal] = detail::argmax_refined(
        [&](double z) { return ev.defect(z); }, kOptimalTimeLo, kOptimalTimeHi,
        kOptimalTimeCoarse, 1e-3);
    Point p{ev.defect(z_opt), z_opt, multimodal};
    cache.emplace(key, p);
    return p;
  };

  const double step = 0.002;
  std::vector<double> lbs;
  for (double lb = lb_lo; lb < lb_hi + step / 2; lb += step) {
    lbs.push_back(std::min(lb, lb_hi));
  }
  std::vector<double> vals(lbs.size());
  bool multimodal = false;
  for (std::size_t i = 0; i < lbs.size(); ++i) {
    const Point p = peak_at(lbs[i]);
    vals[i] = p.d_star;
    multimodal = multimodal || p.multimodal;
  }
  const std::size_t i0 = static_cast<std::size_t>(
      std::max_element(vals.begin(), vals.end()) - vals.begin());
  const double a = lbs[i0 == 0 ? 0 : i0 - 1];
  const double b = lbs[std::min(lbs.size() - 1, i0 + 1)];
  const double lb_opt = detail::golden_max(
      [&](double lb) { return peak_at(lb).d_star; }, a, b, kOptimalProductTol);
  const Point best = peak_at(lb_opt);

  OptimizationResult r;
  r.optimal_scaled_z = best.z_star;
  r.optimal_lb_fraction = static_cast<double>(std::llround(lb_opt * 1e6)) * 1e-6;
  r.max_defect = best.d_star;
  r.tolerance = kOptimalProductTol;
  r.multimodal = multimodal || best.multimodal;
  return r;
}

// Brackets the positive region of a sampled curve with linear interpolation
// between neighbouring samples. When the curve is already positive at an
// endpoint the bracket is marked open on that side.
inline ViolationRange violation_range(const DefectCurve& curve) {
  const auto& z = curve.scaled_z;
  const auto& d = curve.defect;
  if (z.size() != d.size() || z.size() < 2) {
    throw invalid_argument("violation_range: curve needs at least two points");
  }
  ViolationRange r;
  std::size_t first_pos = z.size();
  std::size_t last_pos = z.size();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0) {
      if (first_pos == z.size()) first_pos = i;
      last_pos = i;
    }
  }
  if (first_pos == z.size()) return r;  // never positive
  r.empty = false;
  if (first_pos == 0) {
    r.z_lo = z.front();
    r.lower_open = true;
  } else {
    const std::size_t i = first_pos - 1;
    r.z_lo = z[i] + (z[i + 1] - z[i]) * (0.0 - d[i]) / (d[i + 1] - d[i]);
  }
  if (last_pos == z.size() - 1) {
    r.z_hi = z.back();
    r.upper_open = true;
  } else {
    const std::size_t i = last_pos;
    r.z_hi = z[i] + (z[i + 1] - z[i]) * (0.0 - d[i]) / (d[i + 1] - d[i]);
  }
  return r;
}

}  // namespace posmom
