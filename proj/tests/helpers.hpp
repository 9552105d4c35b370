#pragma once

#include "posmom/posmom.hpp"

// Reference geometry used across the suite: 800 nm light, a 47 um slit
// imaged against a 37 um slit through a 10 cm lens. Regression constants in
// the tests were frozen from an independently written quadrature oracle run
// at exactly this geometry and grid policy.

inline posmom::PhotonContext ref_ctx() { return posmom::make_context(800e-9); }

inline posmom::ExperimentParams ref_params() {
  return posmom::make_params(47e-6, 37e-6, 0.1, ref_ctx());
}
