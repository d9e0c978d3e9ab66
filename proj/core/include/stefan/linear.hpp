#pragma once

#include <memory>
#include <vector>

#include "stefan/calculus.hpp"
#include "stefan/grid.hpp"

namespace stefan {

/// Thomas algorithm for a tridiagonal system; overwrites d with the solution.
/// a = sub-diagonal (a[0] unused), b = diagonal, c = super-diagonal (c[n-1] unused).
void tridiag_solve(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
                   std::vector<double>& d);

/// Implicit heat-type step on a ball with Dirichlet-0 shell:
/// solves (diag(1/c) - dt*L) x = diag(1/c) b over interior cells, which is the
/// SPD form of (I - dt*diag(c)*L) x = b. Vectors are full-grid with zeros kept
/// outside the interior. Factor once per coefficient; solve repeatedly.
class BallImplicitSolver {
 public:
  BallImplicitSolver(const BallDomain& ball, double dt);
  ~BallImplicitSolver();
  BallImplicitSolver(BallImplicitSolver&&) noexcept;
  BallImplicitSolver& operator=(BallImplicitSolver&&) noexcept;

  /// coef: diffusion coefficient per grid cell (read on interior cells only),
  /// must be > 0 there.
  void factor(const std::vector<double>& coef_full);
  void factor_uniform(double coef);

  void solve(const std::vector<double>& b_full, std::vector<double>& x_full) const;
  void step(std::vector<double>& phi_full) const;  // in place

  const BallDomain& ball() const;
  double dt() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Solves the Newton system (I - dt * L_bc * diag(slopes)) delta = rhs on the
/// full grid. 1D uses the Thomas algorithm, 2D a sparse LU factorization.
std::vector<double> solve_newton_system(const Grid& g, Boundary bc, double dt,
                                        const std::vector<double>& slopes,
                                        const std::vector<double>& rhs);

}  // namespace stefan
