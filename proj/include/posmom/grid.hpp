#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "posmom/constants.hpp"
#include "posmom/errors.hpp"

namespace posmom {

// Uniform transverse-position grid. Point i sits at x_min + i*dx and owns
// the cell [x_i - dx/2, x_i + dx/2]; interval integrals weight end cells by
// the covered fraction, so a state constant on whole cells integrates
// exactly.
struct Grid {
  double x_min = 0.0;
  std::size_t n_points = 0;
  double dx = 0.0;

  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
  double x_max() const { return x(n_points - 1); }
  double span() const { return static_cast<double>(n_points) * dx; }

  std::vector<double> positions() const {
    std::vector<double> xs(n_points);
    for (std::size_t i = 0; i < n_points; ++i) xs[i] = x(i);
    return xs;
  }

  bool operator==(const Grid& other) const = default;
};

inline void validate(const Grid& g, const char* where) {
  if (g.n_points < 2) throw invalid_grid(std::string(where) + ": grid needs at least 2 points");
  if (!(g.dx > 0.0) || !std::isfinite(g.dx)) throw invalid_grid(std::string(where) + ": grid dx must be positive");
  if (!std::isfinite(g.x_min)) throw invalid_grid(std::string(where) + ": grid x_min must be finite");
}

// Centered grid with x = 0 on a grid point (index n/2), the layout the
// spectral propagator expects. Half width is n*dx/2; the last point stops
// one cell short of +half_width, as usual for periodic grids.
inline Grid make_centered_grid(std::size_t n_points, double dx) {
  Grid g{-(static_cast<double>(n_points / 2) * dx), n_points, dx};
  validate(g, "make_centered_grid");
  return g;
}

// Grid sizing for a slit of width L and a momentum scale B.
//
// dx = L/m with m odd puts both slit edges exactly on cell boundaries, so
// the box state is represented without partial cells. The half width must
// reach tail_factor * (2 hbar / B) to capture the 1/x tails of the
// momentum state (tail_factor 50 keeps the truncated norm under 1 percent
// with margin). m is the largest odd cell count compatible with that span,
// and n doubles from n_base until m >= min_slit_cells is possible.
inline Grid auto_grid(double slit_L, double momentum_B,
                      std::size_t n_base = 1u << 14,
                      std::size_t min_slit_cells = 23,
                      double tail_factor = 50.0) {
  if (!(slit_L > 0.0) || !(momentum_B > 0.0)) {
    throw invalid_argument("auto_grid: slit_L and momentum_B must be positive");
  }
  if (n_base < 2 || min_slit_cells < 3) {
    throw invalid_argument("auto_grid: n_base or min_slit_cells too small");
  }
  const double x_required = tail_factor * 2.0 * constants::hbar / momentum_B;
  std::size_t n = n_base;
  for (int doublings = 0; doublings < 16; ++doublings, n *= 2) {
    auto m = static_cast<std::size_t>(std::floor(
        static_cast<double>(n) * slit_L / (2.0 * x_required)));
    if (m % 2 == 0 && m > 0) --m;
    if (m >= min_slit_cells) {
      return make_centered_grid(n, slit_L / static_cast<double>(m));
    }
  }
  throw invalid_grid("auto_grid: no feasible grid within 16 doublings");
}

}  // namespace posmom
