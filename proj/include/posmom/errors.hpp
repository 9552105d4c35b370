#pragma once

#include <stdexcept>
#include <string>

namespace posmom {

// Base for everything this library throws on purpose. The CLI maps
// subtypes to exit codes, so new error kinds should subclass this.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// bad values passed by the caller (non-finite lengths, mismatched grids, ...)
struct invalid_argument : error {
  using error::error;
};

// grid cannot represent the requested state (too narrow, too coarse)
struct invalid_grid : error {
  using error::error;
};

// input outside a formula's validity domain (e.g. near field of the
// far-field closed form)
struct domain_error : error {
  using error::error;
};

// momentum content too close to the Nyquist edge for trustworthy
// spectral propagation
struct aliasing_risk : error {
  using error::error;
};

// superposition normalizer 2(1+<a|b>) vanished or went negative
struct degenerate_superposition : error {
  using error::error;
};

// fit cannot proceed (flat or empty data)
struct degenerate_fit : error {
  using error::error;
};

struct io_error : error {
  using error::error;
};

}  // namespace posmom
