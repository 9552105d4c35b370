#pragma once

// Umbrella header for the whole library.

#include "posmom/classical.hpp"
#include "posmom/constants.hpp"
#include "posmom/defect.hpp"
#include "posmom/errors.hpp"
#include "posmom/fourier.hpp"
#include "posmom/fringe.hpp"
#include "posmom/grid.hpp"
#include "posmom/io.hpp"
#include "posmom/photon.hpp"
#include "posmom/probability.hpp"
#include "posmom/propagator.hpp"
#include "posmom/random.hpp"
#include "posmom/states.hpp"
#include "posmom/wavefunction.hpp"
