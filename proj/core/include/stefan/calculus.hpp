#pragma once

#include <functional>
#include <vector>

#include "stefan/grid.hpp"

namespace stefan {

/// Boundary handling for the full-grid Laplacian stencil.
enum class Boundary {
  zero_flux,       // mirror ghost: ghost value equals the boundary cell value
  dirichlet_zero,  // ghost value 0
};

/// Standard second-order centered Laplacian (3-point in 1D, 5-point in 2D).
Field laplacian(const Field& f, Boundary bc);

/// Laplacian restricted to ball-interior cells, with value 0 outside the
/// interior (Dirichlet shell). Non-interior output cells are 0.
Field laplacian_in_ball(const Field& f, const BallDomain& ball);
void laplacian_in_ball(const Grid& g, const std::vector<double>& f, const BallDomain& ball,
                       std::vector<double>& out);

/// Sum over grid edges of (f_b - f_a)^2 / h^2 * cellvolume, where values
/// outside the ball interior count as 0 and edges touch at least one interior
/// cell. This is the squared forward-difference gradient norm paired with
/// laplacian_in_ball by summation by parts.
double gradient_energy_in_ball(const Field& f, const BallDomain& ball);

/// One-sided second-order outward radial derivative per shell cell,
/// divided by the direction cosine. Expects f ~ 0 on the shell.
std::vector<double> normal_derivative(const Field& f, const BallDomain& ball);

/// Space-time integral of |u| * exp(-c |x|^2) over the whole grid and all
/// stored slices (each slice weighted by dt).
double weighted_l1(const SpaceTimeField& u, double c);

/// Same weight integral over a single slice (no dt factor).
double weighted_l1_slice(const Grid& g, const std::vector<double>& u, double c);

/// Integral over the shell surface and over stored times in (t1, t2] of
/// g * weight, with surface weights sigma and dt time weights.
/// `weight` is evaluated per shell cell.
double shell_time_integral(const SpaceTimeField& g, const BallDomain& ball, double t1, double t2,
                           const std::function<double(int cell)>& weight);

/// Cellwise integral of f over the ball interior times cell volume.
double ball_integral(const Field& f, const BallDomain& ball);

/// L1 norm of (u - v) over a cell set (whole grid if cells empty).
double l1_difference(const Grid& g, const std::vector<double>& u, const std::vector<double>& v,
                     const std::vector<int>& cells);

/// Conservative restriction of a fine field to a coarse grid covering the
/// same box with half the resolution per axis (factor-2 cell merging).
Field restrict_to_coarse(const Field& fine, const Grid& coarse);
SpaceTimeField restrict_to_coarse(const SpaceTimeField& fine, const Grid& coarse);

}  // namespace stefan
