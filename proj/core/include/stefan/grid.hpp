#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stefan {

/// Uniform cell-centered grid in 1 or 2 dimensions (equal spacing per axis).
struct Grid {
  int dim = 1;
  std::array<double, 2> origin{0.0, 0.0};  // lower corner of the box
  double h = 1.0;                          // cell spacing
  std::array<int, 2> cells{3, 1};          // cells per axis; cells[1]==1 in 1D

  Grid() = default;
  Grid(int dim_, std::array<double, 2> origin_, double h_, std::array<int, 2> cells_);

  static Grid make_1d(double lo, double hi, int n);
  static Grid make_2d(double lox, double loy, double hix, double hiy, int nx, int ny);

  int size() const { return cells[0] * cells[1]; }
  double cell_volume() const { return dim == 1 ? h : h * h; }

  int index(int ix, int iy = 0) const { return ix + cells[0] * iy; }
  int ix_of(int cell) const { return cell % cells[0]; }
  int iy_of(int cell) const { return cell / cells[0]; }

  double center(int cell, int axis) const {
    const int i = axis == 0 ? ix_of(cell) : iy_of(cell);
    return origin[axis] + (i + 0.5) * h;
  }
  std::array<double, 2> center(int cell) const {
    return {center(cell, 0), dim == 2 ? center(cell, 1) : 0.0};
  }

  double box_lo(int axis) const { return origin[axis]; }
  double box_hi(int axis) const { return origin[axis] + cells[axis] * h; }

  /// Squared distance of a cell center from a point (2D-aware).
  double dist2(int cell, const std::array<double, 2>& p) const;

  bool operator==(const Grid& o) const {
    return dim == o.dim && origin == o.origin && h == o.h && cells == o.cells;
  }
};

/// One scalar value per cell at a fixed time.
struct Field {
  Grid grid;
  std::vector<double> v;
  double time_tag = 0.0;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0, double time = 0.0)
      : grid(g), v(static_cast<size_t>(g.size()), fill), time_tag(time) {}

  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<size_t>(i)]; }
  int size() const { return static_cast<int>(v.size()); }

  double max_abs() const;
  double sum() const;  // plain cell-value sum; multiply by cell_volume for mass
};

/// Uniformly spaced time slices of cell data on one grid.
struct SpaceTimeField {
  Grid grid;
  double t_start = 0.0;
  double dt = 1.0;
  std::vector<std::vector<double>> slices;

  SpaceTimeField() = default;
  SpaceTimeField(const Grid& g, double t0, double dt_) : grid(g), t_start(t0), dt(dt_) {
    if (dt_ <= 0) throw std::invalid_argument("SpaceTimeField: dt must be positive");
  }

  int steps() const { return static_cast<int>(slices.size()); }
  double time(int k) const { return t_start + k * dt; }
  double t_end() const { return steps() == 0 ? t_start : time(steps() - 1); }

  const std::vector<double>& slice(int k) const { return slices[static_cast<size_t>(k)]; }
  std::vector<double>& slice(int k) { return slices[static_cast<size_t>(k)]; }

  void push(std::vector<double> values);
  Field field_at(int k) const;

  /// Index of the slice at time t; throws if t is not on the stored lattice.
  int index_of_time(double t) const;

  /// Linear-in-time interpolation at an arbitrary t inside the stored range.
  double value_interp(int cell, double t) const;

  double max_abs() const;
};

/// Discrete ball: interior cells have centers with |x - center| <= radius;
/// the shell is the one-cell layer just outside, used as a Dirichlet boundary
/// and as the surface for flux integrals.
struct BallDomain {
  struct ShellCell {
    int cell = -1;
    int axis = 0;    // radial difference axis
    int dir = +1;    // outward direction along that axis
    int in1 = -1;    // first inward neighbor along the axis
    int in2 = -1;    // second inward neighbor
    double sigma = 1.0;   // surface weight
    double cosine = 1.0;  // |x_axis| / |x|, converts axis derivative to radial
    double r = 0.0;       // distance of the cell center from the ball center
  };

  Grid grid;
  double radius = 1.0;
  std::array<double, 2> center{0.0, 0.0};
  std::vector<int> interior;       // cell indices, ascending
  std::vector<char> interior_mask; // size grid.size()
  std::vector<ShellCell> shell;

  BallDomain() = default;
  BallDomain(const Grid& g, double R, std::array<double, 2> c = {0.0, 0.0});

  bool is_interior(int cell) const { return interior_mask[static_cast<size_t>(cell)] != 0; }
  double volume() const { return static_cast<double>(interior.size()) * grid.cell_volume(); }
  double surface_total() const;
};

}  // namespace stefan
