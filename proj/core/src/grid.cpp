#include "stefan/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stefan {

Grid::Grid(int dim_, std::array<double, 2> origin_, double h_, std::array<int, 2> cells_)
    : dim(dim_), origin(origin_), h(h_), cells(cells_) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
  if (h <= 0) throw std::invalid_argument("Grid: spacing must be positive");
  if (cells[0] < 3) throw std::invalid_argument("Grid: need at least 3 cells per axis");
  if (dim == 1) {
    cells[1] = 1;
  } else if (cells[1] < 3) {
    throw std::invalid_argument("Grid: need at least 3 cells per axis");
  }
}

Grid Grid::make_1d(double lo, double hi, int n) {
  if (hi <= lo) throw std::invalid_argument("Grid: empty box");
  return Grid(1, {lo, 0.0}, (hi - lo) / n, {n, 1});
}

Grid Grid::make_2d(double lox, double loy, double hix, double hiy, int nx, int ny) {
  if (hix <= lox || hiy <= loy) throw std::invalid_argument("Grid: empty box");
  const double hx = (hix - lox) / nx;
  const double hy = (hiy - loy) / ny;
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
    throw std::invalid_argument("Grid: spacing must be equal per axis");
  return Grid(2, {lox, loy}, hx, {nx, ny});
}

double Grid::dist2(int cell, const std::array<double, 2>& p) const {
  const double dx = center(cell, 0) - p[0];
  if (dim == 1) return dx * dx;
  const double dy = center(cell, 1) - p[1];
  return dx * dx + dy * dy;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double Field::sum() const {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void SpaceTimeField::push(std::vector<double> values) {
  if (static_cast<int>(values.size()) != grid.size())
    throw std::invalid_argument("SpaceTimeField: slice size mismatch");
  slices.push_back(std::move(values));
}

Field SpaceTimeField::field_at(int k) const {
  Field f(grid, 0.0, time(k));
  f.v = slices[static_cast<size_t>(k)];
  return f;
}

int SpaceTimeField::index_of_time(double t) const {
  const double k = (t - t_start) / dt;
  const long kr = std::lround(k);
  if (kr < 0 || kr >= steps() || std::abs(k - static_cast<double>(kr)) > 1e-6)
    throw std::invalid_argument("SpaceTimeField: time " + std::to_string(t) +
                                " is not a stored slice");
  return static_cast<int>(kr);
}

double SpaceTimeField::value_interp(int cell, double t) const {
  if (steps() == 0) throw std::invalid_argument("SpaceTimeField: empty");
  const double tol = 1e-9 * dt;
  if (t <= t_start + tol) return slices.front()[static_cast<size_t>(cell)];
  if (t >= t_end() - tol) return slices.back()[static_cast<size_t>(cell)];
  const double s = (t - t_start) / dt;
  const int k = std::min(static_cast<int>(std::floor(s)), steps() - 2);
  const double w = s - k;
  return (1.0 - w) * slices[static_cast<size_t>(k)][static_cast<size_t>(cell)] +
         w * slices[static_cast<size_t>(k + 1)][static_cast<size_t>(cell)];
}

double SpaceTimeField::max_abs() const {
  double m = 0.0;
  for (const auto& s : slices)
    for (double x : s) m = std::max(m, std::abs(x));
  return m;
}

namespace {

int neighbor(const Grid& g, int cell, int axis, int dir) {
  int ix = g.ix_of(cell);
  int iy = g.iy_of(cell);
  if (axis == 0)
    ix += dir;
  else
    iy += dir;
  if (ix < 0 || ix >= g.cells[0] || iy < 0 || iy >= g.cells[1]) return -1;
  return g.index(ix, iy);
}

}  // namespace

BallDomain::BallDomain(const Grid& g, double R, std::array<double, 2> c)
    : grid(g), radius(R), center(c) {
  if (R <= 0) throw std::invalid_argument("BallDomain: radius must be positive");
  const double R2 = R * R;
  interior_mask.assign(static_cast<size_t>(g.size()), 0);
  for (int cell = 0; cell < g.size(); ++cell) {
    if (g.dist2(cell, c) <= R2) {
      interior_mask[static_cast<size_t>(cell)] = 1;
      interior.push_back(cell);
    }
  }
  if (interior.empty()) throw std::invalid_argument("BallDomain: no interior cells");

  // Shell: non-interior cells adjacent to an interior cell. The radial
  // difference axis is the adjacency axis with the largest center component.
  for (int cell = 0; cell < g.size(); ++cell) {
    if (interior_mask[static_cast<size_t>(cell)]) continue;
    ShellCell sc;
    double best = -1.0;
    for (int axis = 0; axis < g.dim; ++axis) {
      for (int dir : {-1, +1}) {
        const int nb = neighbor(g, cell, axis, dir);
        if (nb < 0 || !interior_mask[static_cast<size_t>(nb)]) continue;
        // neighbor toward the ball lies at -dir... adjacency found along `axis`
        // with the interior side at direction `dir`; outward is -dir.
        const double comp = std::abs(g.center(cell, axis) - c[axis]);
        if (comp > best) {
          best = comp;
          sc.cell = cell;
          sc.axis = axis;
          sc.dir = -dir;  // outward
          sc.in1 = nb;
        }
      }
    }
    if (sc.cell < 0) continue;
    sc.in2 = neighbor(g, sc.in1, sc.axis, -sc.dir);
    if (sc.in2 < 0 || !interior_mask[static_cast<size_t>(sc.in2)])
      throw std::invalid_argument(
          "BallDomain: shell cell lacks two interior neighbors along its radial axis "
          "(ball too small for this grid)");
    sc.r = std::sqrt(g.dist2(cell, c));
    sc.cosine = best / sc.r;
    shell.push_back(sc);
  }
  if (shell.empty()) throw std::invalid_argument("BallDomain: empty shell");

  // The ball plus its shell must fit inside the grid so that Dirichlet data on
  // the shell fully encloses the interior.
  for (int cell : interior) {
    for (int axis = 0; axis < g.dim; ++axis) {
      for (int dir : {-1, +1}) {
        if (neighbor(g, cell, axis, dir) < 0)
          throw std::invalid_argument("BallDomain: ball touches the grid boundary");
      }
    }
  }

  // Surface weights: counting measure in 1D; arc length normalized to the
  // exact circumference in 2D (prevents a systematic bias in shell integrals).
  if (g.dim == 1) {
    for (auto& sc : shell) sc.sigma = 1.0;
  } else {
    const double total = 2.0 * M_PI * R;
    const double per = total / static_cast<double>(shell.size());
    for (auto& sc : shell) sc.sigma = per;
  }
}

double BallDomain::surface_total() const {
  double s = 0.0;
  for (const auto& sc : shell) s += sc.sigma;
  return s;
}

}  // namespace stefan
