#pragma once

#include <array>
#include <optional>
#include <vector>

#include "stefan/grid.hpp"

namespace stefan {

/// Signed Radon initial datum: point atoms plus a piecewise-constant density
/// on a bounding box. gauss_c is the declared Gaussian-moment exponent.
struct SignedMeasure {
  struct Atom {
    std::array<double, 2> x{0.0, 0.0};
    double weight = 0.0;
  };

  /// Piecewise-constant density on its own box, values on a uniform
  /// subdivision (row-major in 2D).
  struct Density {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{0.0, 0.0};
    std::array<int, 2> cells{1, 1};
    std::vector<double> values;

    double cell_lo(int axis, int i) const {
      return lo[axis] + (hi[axis] - lo[axis]) * i / cells[axis];
    }
    double value_at_cell(int ix, int iy) const {
      return values[static_cast<size_t>(ix + cells[0] * iy)];
    }
  };

  int dim = 1;
  std::vector<Atom> atoms;
  std::optional<Density> density;
  double gauss_c = 0.0;  // 0 means "not declared"

  double total_mass() const;
};

/// Sum_atoms |w| exp(-c|x|^2) plus the exact integral of |density| exp(-c|x|^2)
/// (per-axis error-function antiderivative per density cell). c > 0 required.
double gaussian_moment(const SignedMeasure& mu, double c);

/// Projects the measure onto a grid: cell value = (atom mass in cell +
/// exact density integral over the cell) / cell volume. Atoms must lie
/// inside the grid box; ties at cell faces go to the cell on the positive side.
Field cell_average(const SignedMeasure& mu, const Grid& grid);

}  // namespace stefan
