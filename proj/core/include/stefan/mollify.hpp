#pragma once

#include <utility>
#include <vector>

#include "stefan/grid.hpp"
#include "stefan/nonlinearity.hpp"

namespace stefan {

/// Space-time smoothing kernel: the radial bump (1 - |z|^2)^4 on the unit
/// ball of R^{n+1}, shrunk to support radius 1/m. The sampled kernel is
/// renormalized to unit discrete mass; `single_power` scaling instead keeps
/// total mass m^{-n} (the literal m * phi(m y, m s) scaling).
struct MollifierSpec {
  int m = 4;
  enum class Scaling { mass_normalized, single_power };
  Scaling scaling = Scaling::mass_normalized;
};

struct KernelSample {
  int kx = 0, ky = 0, kt = 0;  // half-widths in cells / steps
  std::vector<double> w;       // (2kx+1) x (2ky+1) x (2kt+1), space-major
  double mass = 0.0;           // discrete sum of w

  double at(int dx, int dy, int dt_) const {
    const int nx = 2 * kx + 1, ny = 2 * ky + 1;
    return w[static_cast<size_t>((dx + kx) + nx * ((dy + ky) + ny * (dt_ + kt)))];
  }
};

/// Samples the scaled kernel on the grid/time lattice of u.
KernelSample sample_kernel(const MollifierSpec& spec, const Grid& g, double dt);

enum class ConvolveBoundary {
  shrink,  // output restricted to cells where the kernel support fits
  mirror,  // indices reflected at the domain edges
};

/// Space-time convolution of u with the kernel. With `shrink`, the result
/// lives on a sub-box (margins removed per axis and in time) and throws when
/// nothing remains; with `mirror`, the result keeps the full domain.
SpaceTimeField convolve(const SpaceTimeField& u, const MollifierSpec& spec,
                        ConvolveBoundary mode);

/// Mollifies u and alpha(u) together (shrink mode).
std::pair<SpaceTimeField, SpaceTimeField> mollify(const SpaceTimeField& u, const Nonlinearity& nl,
                                                  const MollifierSpec& spec);

}  // namespace stefan
