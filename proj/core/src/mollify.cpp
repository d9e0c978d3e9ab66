#include "stefan/mollify.hpp"

#include <cmath>
#include <stdexcept>

namespace stefan {

KernelSample sample_kernel(const MollifierSpec& spec, const Grid& g, double dt) {
  if (spec.m < 1) throw std::invalid_argument("sample_kernel: m >= 1 required");
  const double rad = 1.0 / spec.m;
  KernelSample k;
  k.kx = static_cast<int>(std::floor(rad / g.h));
  k.ky = g.dim == 2 ? k.kx : 0;
  k.kt = static_cast<int>(std::floor(rad / dt));
  const int nx = 2 * k.kx + 1, ny = 2 * k.ky + 1, nt = 2 * k.kt + 1;
  k.w.assign(static_cast<size_t>(nx) * ny * nt, 0.0);
  double sum = 0.0;
  for (int it = -k.kt; it <= k.kt; ++it) {
    for (int iy = -k.ky; iy <= k.ky; ++iy) {
      for (int ix = -k.kx; ix <= k.kx; ++ix) {
        // kernel argument z = m * (y, s)
        const double zx = spec.m * ix * g.h;
        const double zy = spec.m * iy * g.h;
        const double zt = spec.m * it * dt;
        const double q = zx * zx + zy * zy + zt * zt;
        if (q >= 1.0) continue;
        const double p = 1.0 - q;
        const double val = p * p * p * p;
        k.w[static_cast<size_t>((ix + k.kx) + nx * ((iy + k.ky) + ny * (it + k.kt)))] = val;
        sum += val;
      }
    }
  }
  if (sum <= 0) throw std::runtime_error("sample_kernel: degenerate kernel");
  double target = 1.0;
  if (spec.scaling == MollifierSpec::Scaling::single_power)
    target = std::pow(static_cast<double>(spec.m), -g.dim);
  for (double& x : k.w) x *= target / sum;
  k.mass = target;
  return k;
}

SpaceTimeField convolve(const SpaceTimeField& u, const MollifierSpec& spec,
                        ConvolveBoundary mode) {
  const Grid& g = u.grid;
  KernelSample ker = sample_kernel(spec, g, u.dt);
  const int nx = g.cells[0], ny = g.cells[1], nt = u.steps();

  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
  };

  if (mode == ConvolveBoundary::mirror) {
    SpaceTimeField out(g, u.t_start, u.dt);
    std::vector<double> sl(static_cast<size_t>(g.size()));
    for (int kt = 0; kt < nt; ++kt) {
      for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
          double acc = 0.0;
          for (int dt_ = -ker.kt; dt_ <= ker.kt; ++dt_) {
            const auto& src = u.slice(reflect(kt - dt_, nt));
            for (int dy = -ker.ky; dy <= ker.ky; ++dy) {
              const int jy = g.dim == 2 ? reflect(iy - dy, ny) : 0;
              for (int dx = -ker.kx; dx <= ker.kx; ++dx) {
                const int jx = reflect(ix - dx, nx);
                acc += ker.at(dx, dy, dt_) * src[static_cast<size_t>(g.index(jx, jy))];
              }
            }
          }
          sl[static_cast<size_t>(g.index(ix, iy))] = acc;
        }
      }
      out.push(sl);
    }
    return out;
  }

  // shrink mode: valid output cells only
  const int ox = ker.kx, oy = g.dim == 2 ? ker.ky : 0, ot = ker.kt;
  const int mx = nx - 2 * ox, my = g.dim == 2 ? ny - 2 * oy : 1, mt = nt - 2 * ot;
  if (mx < 3 || (g.dim == 2 && my < 3) || mt < 1)
    throw std::invalid_argument("convolve: kernel support exceeds the space-time box");
  Grid sub(g.dim, {g.origin[0] + ox * g.h, g.origin[1] + (g.dim == 2 ? oy * g.h : 0.0)}, g.h,
           {mx, g.dim == 2 ? my : 1});
  SpaceTimeField out(sub, u.time(ot), u.dt);
  std::vector<double> sl(static_cast<size_t>(sub.size()));
  for (int kt = ot; kt < nt - ot; ++kt) {
    for (int iy = 0; iy < my; ++iy) {
      for (int ix = 0; ix < mx; ++ix) {
        double acc = 0.0;
        for (int dt_ = -ker.kt; dt_ <= ker.kt; ++dt_) {
          const auto& src = u.slice(kt - dt_);
          for (int dy = -ker.ky; dy <= ker.ky; ++dy) {
            const int jy = g.dim == 2 ? iy + oy - dy : 0;
            for (int dx = -ker.kx; dx <= ker.kx; ++dx) {
              const int jx = ix + ox - dx;
              acc += ker.at(dx, dy, dt_) * src[static_cast<size_t>(g.index(jx, jy))];
            }
          }
        }
        sl[static_cast<size_t>(sub.index(ix, iy))] = acc;
      }
    }
    out.push(sl);
  }
  return out;
}

std::pair<SpaceTimeField, SpaceTimeField> mollify(const SpaceTimeField& u, const Nonlinearity& nl,
                                                  const MollifierSpec& spec) {
  SpaceTimeField au(u.grid, u.t_start, u.dt);
  std::vector<double> sl(static_cast<size_t>(u.grid.size()));
  for (int k = 0; k < u.steps(); ++k) {
    const auto& src = u.slice(k);
    for (size_t i = 0; i < src.size(); ++i) sl[i] = nl.eval(src[i]);
    au.push(sl);
  }
  return {convolve(u, spec, ConvolveBoundary::shrink),
          convolve(au, spec, ConvolveBoundary::shrink)};
}

}  // namespace stefan
