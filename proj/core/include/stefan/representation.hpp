#pragma once

#include "stefan/grid.hpp"
#include "stefan/nonlinearity.hpp"
#include "stefan/test_functions.hpp"

namespace stefan {

struct GreenIdentityTerms {
  double end_pairing = 0.0;    // int_B u(t2) phi(t2)
  double start_pairing = 0.0;  // int_B u(t1) phi(t1)
  double shell_flux = 0.0;     // int int_shell alpha(u) dphi/dn
  double interior_ut = 0.0;    // int int_B u dphi/dt
  double interior_lap = 0.0;   // int int_B alpha(u) lap(phi)
  double residual = 0.0;       // |end - (start - shell + interior_ut + interior_lap)|
};

/// Evaluates the windowed balance identity on the ball for an analytic test
/// function that vanishes on the shell cells:
///   int u(t2) phi(t2) = int u(t1) phi(t1) - int int alpha(u) dphi/dn
///                       + int int u phi_t + alpha(u) lap(phi).
/// Interior space-time terms use midpoint time quadrature with exact
/// derivatives of phi; u is averaged between adjacent slices.
GreenIdentityTerms green_identity(const SpaceTimeField& u, const Nonlinearity& nl,
                                  const SpaceTimeTestFunction& phi, const BallDomain& ball,
                                  double t1, double t2);

/// Convenience: just the residual.
double green_residual(const SpaceTimeField& u, const Nonlinearity& nl,
                      const SpaceTimeTestFunction& phi, const BallDomain& ball, double t1,
                      double t2);

}  // namespace stefan
