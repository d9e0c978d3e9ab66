#include "stefan/measure.hpp"

#include <cmath>
#include <stdexcept>

namespace stefan {

namespace {

// integral of exp(-c x^2) over [a, b]
double gauss_integral_1d(double c, double a, double b) {
  const double s = std::sqrt(c);
  return 0.5 * std::sqrt(M_PI / c) * (std::erf(s * b) - std::erf(s * a));
}

// Overlap of [a1,b1] with [a2,b2].
double overlap(double a1, double b1, double a2, double b2) {
  const double lo = std::max(a1, a2);
  const double hi = std::min(b1, b2);
  return hi > lo ? hi - lo : 0.0;
}

}  // namespace

double SignedMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.weight;
  if (density) {
    const auto& d = *density;
    double cellvol = (d.hi[0] - d.lo[0]) / d.cells[0];
    if (d.dim == 2) cellvol *= (d.hi[1] - d.lo[1]) / d.cells[1];
    for (double v : d.values) m += v * cellvol;
  }
  return m;
}

double gaussian_moment(const SignedMeasure& mu, double c) {
  if (c <= 0) throw std::invalid_argument("gaussian_moment: exponent must be positive");
  double s = 0.0;
  for (const auto& a : mu.atoms) {
    const double r2 = a.x[0] * a.x[0] + (mu.dim == 2 ? a.x[1] * a.x[1] : 0.0);
    s += std::abs(a.weight) * std::exp(-c * r2);
  }
  if (mu.density) {
    const auto& d = *mu.density;
    for (int iy = 0; iy < (d.dim == 2 ? d.cells[1] : 1); ++iy) {
      for (int ix = 0; ix < d.cells[0]; ++ix) {
        const double v = std::abs(d.value_at_cell(ix, iy));
        if (v == 0.0) continue;
        double cell = gauss_integral_1d(c, d.cell_lo(0, ix), d.cell_lo(0, ix + 1));
        if (d.dim == 2) cell *= gauss_integral_1d(c, d.cell_lo(1, iy), d.cell_lo(1, iy + 1));
        s += v * cell;
      }
    }
  }
  return s;
}

Field cell_average(const SignedMeasure& mu, const Grid& grid) {
  if (mu.dim != grid.dim) throw std::invalid_argument("cell_average: dimension mismatch");
  Field out(grid, 0.0, 0.0);
  const double vol = grid.cell_volume();

  for (const auto& a : mu.atoms) {
    std::array<int, 2> idx{0, 0};
    for (int axis = 0; axis < grid.dim; ++axis) {
      const double rel = (a.x[axis] - grid.origin[axis]) / grid.h;
      // Ties at cell faces go to the cell on the positive side.
      int i = static_cast<int>(std::floor(rel));
      if (i < 0 || i >= grid.cells[axis] ||
          a.x[axis] < grid.box_lo(axis) || a.x[axis] >= grid.box_hi(axis))
        throw std::invalid_argument("cell_average: atom outside the grid box");
      idx[axis] = i;
    }
    out[grid.index(idx[0], idx[1])] += a.weight / vol;
  }

  if (mu.density) {
    const auto& d = *mu.density;
    // Exact overlap integration: iterate density cells, spread onto grid cells.
    for (int jy = 0; jy < (d.dim == 2 ? d.cells[1] : 1); ++jy) {
      for (int jx = 0; jx < d.cells[0]; ++jx) {
        const double val = d.value_at_cell(jx, jy);
        if (val == 0.0) continue;
        const double ax = d.cell_lo(0, jx), bx = d.cell_lo(0, jx + 1);
        const double ay = d.dim == 2 ? d.cell_lo(1, jy) : 0.0;
        const double by = d.dim == 2 ? d.cell_lo(1, jy + 1) : 0.0;
        const int ix0 = std::max(0, static_cast<int>(std::floor((ax - grid.origin[0]) / grid.h)));
        const int ix1 = std::min(grid.cells[0] - 1,
                                 static_cast<int>(std::floor((bx - grid.origin[0]) / grid.h)));
        int iy0 = 0, iy1 = 0;
        if (d.dim == 2) {
          iy0 = std::max(0, static_cast<int>(std::floor((ay - grid.origin[1]) / grid.h)));
          iy1 = std::min(grid.cells[1] - 1,
                         static_cast<int>(std::floor((by - grid.origin[1]) / grid.h)));
        }
        for (int iy = iy0; iy <= iy1; ++iy) {
          for (int ix = ix0; ix <= ix1; ++ix) {
            double ov = overlap(ax, bx, grid.origin[0] + ix * grid.h,
                                grid.origin[0] + (ix + 1) * grid.h);
            if (d.dim == 2)
              ov *= overlap(ay, by, grid.origin[1] + iy * grid.h,
                            grid.origin[1] + (iy + 1) * grid.h);
            if (ov > 0.0) out[grid.index(ix, iy)] += val * ov / vol;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace stefan
