#pragma once

#include <cmath>

#include "posmom/constants.hpp"
#include "posmom/errors.hpp"

// Paraxial photon as an effective massive particle.
//
// A monochromatic photon propagating along z at the speed of light carries
// total momentum p = h/lambda. Writing the transverse Schroedinger equation
// of paraxial optics in particle form assigns it the effective mass
// m = p/c = h/(c lambda), with the propagation distance z = c t playing the
// role of time. All transverse dynamics in this library live in that frame.

namespace posmom {

struct PhotonContext {
  double wavelength;       // m
  double planck_h;         // J s
  double hbar;             // J s
  double light_speed;      // m/s
  double effective_mass;   // kg, h/(c lambda)
  double total_momentum;   // kg m/s, h/lambda
};

inline PhotonContext make_context(double wavelength) {
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
    throw invalid_argument("make_context: wavelength must be positive and finite");
  }
  PhotonContext ctx{};
  ctx.wavelength = wavelength;
  ctx.planck_h = constants::planck_h;
  ctx.hbar = constants::hbar;
  ctx.light_speed = constants::light_speed;
  ctx.effective_mass = constants::planck_h / (constants::light_speed * wavelength);
  ctx.total_momentum = constants::planck_h / wavelength;
  return ctx;
}

// Slit-and-lens geometry with its derived scales.
//
// A slit of width L' placed one focal length before a lens prepares, one
// focal length after it, a state whose transverse momentum is confined to a
// box of width B = h L'/(f lambda): the lens maps momentum p to focal-plane
// position x' = f p / p_total. The product L B / (2 pi hbar) is the single
// dimensionless knob of the whole experiment, and t_M = m L / B is the time
// at which the freely spread slit state and the stationary momentum state
// have identical shapes.
struct ExperimentParams {
  double slit_L;        // m, width of the position slit
  double slit_Lprime;   // m, width of the slit that prepares the momentum state
  double focal_f;       // m
  double momentum_B;    // kg m/s
  double lb_fraction;   // L*B / (2 pi hbar), dimensionless
  double z_M;           // m, c * t_M = f L / L'
  double t_M;           // s, m L / B
  double far_field_z;   // m, L^2/lambda; closed-form evolution valid beyond it
};

inline ExperimentParams make_params(double slit_L, double slit_Lprime,
                                    double focal_f, const PhotonContext& ctx) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(slit_L)) throw invalid_argument("make_params: slit_L must be positive and finite");
  if (!positive(slit_Lprime)) throw invalid_argument("make_params: slit_Lprime must be positive and finite");
  if (!positive(focal_f)) throw invalid_argument("make_params: focal_f must be positive and finite");

  ExperimentParams par{};
  par.slit_L = slit_L;
  par.slit_Lprime = slit_Lprime;
  par.focal_f = focal_f;
  par.momentum_B = ctx.planck_h * slit_Lprime / (focal_f * ctx.wavelength);
  par.lb_fraction = slit_L * par.momentum_B / ctx.planck_h;
  par.t_M = ctx.effective_mass * slit_L / par.momentum_B;
  par.z_M = ctx.light_speed * par.t_M;
  par.far_field_z = slit_L * slit_L / ctx.wavelength;
  return par;
}

inline double z_to_t(double z, const PhotonContext& ctx) {
  return z / ctx.light_speed;
}

inline double t_to_z(double t, const PhotonContext& ctx) {
  return t * ctx.light_speed;
}

}  // namespace posmom
