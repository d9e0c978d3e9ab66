#include "stefan/calculus.hpp"

#include <cmath>
#include <stdexcept>

namespace stefan {

Field laplacian(const Field& f, Boundary bc) {
  const Grid& g = f.grid;
  Field out(g, 0.0, f.time_tag);
  const double inv_h2 = 1.0 / (g.h * g.h);
  const int nx = g.cells[0];
  const int ny = g.cells[1];
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int c = g.index(ix, iy);
      const double fc = f[c];
      double acc = 0.0;
      auto add = [&](int jx, int jy) {
        if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) {
          acc += (bc == Boundary::zero_flux ? fc : 0.0) - fc;
        } else {
          acc += f[g.index(jx, jy)] - fc;
        }
      };
      add(ix - 1, iy);
      add(ix + 1, iy);
      if (g.dim == 2) {
        add(ix, iy - 1);
        add(ix, iy + 1);
      }
      out[c] = acc * inv_h2;
    }
  }
  return out;
}

void laplacian_in_ball(const Grid& g, const std::vector<double>& f, const BallDomain& ball,
                       std::vector<double>& out) {
  out.assign(static_cast<size_t>(g.size()), 0.0);
  const double inv_h2 = 1.0 / (g.h * g.h);
  for (int cell : ball.interior) {
    const int ix = g.ix_of(cell);
    const int iy = g.iy_of(cell);
    const double fc = f[static_cast<size_t>(cell)];
    double acc = -2.0 * g.dim * fc;
    auto val = [&](int jx, int jy) -> double {
      const int j = g.index(jx, jy);
      return ball.is_interior(j) ? f[static_cast<size_t>(j)] : 0.0;
    };
    acc += val(ix - 1, iy) + val(ix + 1, iy);
    if (g.dim == 2) acc += val(ix, iy - 1) + val(ix, iy + 1);
    out[static_cast<size_t>(cell)] = acc * inv_h2;
  }
}

Field laplacian_in_ball(const Field& f, const BallDomain& ball) {
  Field out(f.grid, 0.0, f.time_tag);
  laplacian_in_ball(f.grid, f.v, ball, out.v);
  return out;
}

double gradient_energy_in_ball(const Field& f, const BallDomain& ball) {
  const Grid& g = f.grid;
  const double vol = g.cell_volume();
  const double inv_h2 = 1.0 / (g.h * g.h);
  double e = 0.0;
  const int nx = g.cells[0];
  const int ny = g.cells[1];
  auto val = [&](int cell) -> double {
    return ball.is_interior(cell) ? f[cell] : 0.0;
  };
  // Forward edges in each axis, counting edges with at least one interior end.
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int c = g.index(ix, iy);
      if (ix + 1 < nx) {
        const int r = g.index(ix + 1, iy);
        if (ball.is_interior(c) || ball.is_interior(r)) {
          const double d = val(r) - val(c);
          e += d * d * inv_h2 * vol;
        }
      }
      if (g.dim == 2 && iy + 1 < ny) {
        const int u = g.index(ix, iy + 1);
        if (ball.is_interior(c) || ball.is_interior(u)) {
          const double d = val(u) - val(c);
          e += d * d * inv_h2 * vol;
        }
      }
    }
  }
  return e;
}

std::vector<double> normal_derivative(const Field& f, const BallDomain& ball) {
  std::vector<double> out;
  out.reserve(ball.shell.size());
  const double h = f.grid.h;
  for (const auto& sc : ball.shell) {
    const double fs = f[sc.cell];
    const double f1 = f[sc.in1];
    const double f2 = f[sc.in2];
    const double along_axis = (3.0 * fs - 4.0 * f1 + f2) / (2.0 * h);
    out.push_back(along_axis / sc.cosine);
  }
  return out;
}

double weighted_l1_slice(const Grid& g, const std::vector<double>& u, double c) {
  if (c <= 0) throw std::invalid_argument("weighted_l1: exponent must be positive");
  const std::array<double, 2> zero{0.0, 0.0};
  double s = 0.0;
  for (int cell = 0; cell < g.size(); ++cell)
    s += std::abs(u[static_cast<size_t>(cell)]) * std::exp(-c * g.dist2(cell, zero));
  return s * g.cell_volume();
}

double weighted_l1(const SpaceTimeField& u, double c) {
  double s = 0.0;
  for (int k = 0; k < u.steps(); ++k) s += weighted_l1_slice(u.grid, u.slice(k), c);
  return s * u.dt;
}

double shell_time_integral(const SpaceTimeField& g, const BallDomain& ball, double t1, double t2,
                           const std::function<double(int cell)>& weight) {
  if (!(t1 < t2)) throw std::invalid_argument("shell_time_integral: need t1 < t2");
  const double tol = 1e-6 * g.dt;
  double s = 0.0;
  for (int k = 0; k < g.steps(); ++k) {
    const double t = g.time(k);
    if (t <= t1 + tol || t > t2 + tol) continue;
    const auto& sl = g.slice(k);
    double ring = 0.0;
    for (const auto& sc : ball.shell)
      ring += sl[static_cast<size_t>(sc.cell)] * sc.sigma * (weight ? weight(sc.cell) : 1.0);
    s += ring;
  }
  return s * g.dt;
}

double ball_integral(const Field& f, const BallDomain& ball) {
  double s = 0.0;
  for (int cell : ball.interior) s += f[cell];
  return s * f.grid.cell_volume();
}

double l1_difference(const Grid& g, const std::vector<double>& u, const std::vector<double>& v,
                     const std::vector<int>& cells) {
  double s = 0.0;
  if (cells.empty()) {
    for (size_t i = 0; i < u.size(); ++i) s += std::abs(u[i] - v[i]);
  } else {
    for (int c : cells) s += std::abs(u[static_cast<size_t>(c)] - v[static_cast<size_t>(c)]);
  }
  return s * g.cell_volume();
}

Field restrict_to_coarse(const Field& fine, const Grid& coarse) {
  const Grid& gf = fine.grid;
  if (gf.dim != coarse.dim || gf.cells[0] != 2 * coarse.cells[0] ||
      (gf.dim == 2 && gf.cells[1] != 2 * coarse.cells[1]))
    throw std::invalid_argument("restrict_to_coarse: grids are not factor-2 nested");
  for (int a = 0; a < gf.dim; ++a) {
    if (std::abs(gf.origin[a] - coarse.origin[a]) > 1e-12 * std::max(1.0, std::abs(gf.origin[a])))
      throw std::invalid_argument("restrict_to_coarse: boxes differ");
  }
  Field out(coarse, 0.0, fine.time_tag);
  if (coarse.dim == 1) {
    for (int i = 0; i < coarse.cells[0]; ++i)
      out[i] = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
  } else {
    for (int iy = 0; iy < coarse.cells[1]; ++iy) {
      for (int ix = 0; ix < coarse.cells[0]; ++ix) {
        const double a = fine[gf.index(2 * ix, 2 * iy)];
        const double b = fine[gf.index(2 * ix + 1, 2 * iy)];
        const double c = fine[gf.index(2 * ix, 2 * iy + 1)];
        const double d = fine[gf.index(2 * ix + 1, 2 * iy + 1)];
        out[coarse.index(ix, iy)] = 0.25 * (a + b + c + d);
      }
    }
  }
  return out;
}

SpaceTimeField restrict_to_coarse(const SpaceTimeField& fine, const Grid& coarse) {
  SpaceTimeField out(coarse, fine.t_start, fine.dt);
  for (int k = 0; k < fine.steps(); ++k) {
    Field f = restrict_to_coarse(fine.field_at(k), coarse);
    out.push(std::move(f.v));
  }
  return out;
}

}  // namespace stefan
