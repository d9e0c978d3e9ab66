#include "stefan/representation.hpp"

#include <cmath>
#include <stdexcept>

#include "stefan/calculus.hpp"

namespace stefan {

GreenIdentityTerms green_identity(const SpaceTimeField& u, const Nonlinearity& nl,
                                  const SpaceTimeTestFunction& phi, const BallDomain& ball,
                                  double t1, double t2) {
  const Grid& g = u.grid;
  if (!(g == ball.grid)) throw std::invalid_argument("green_identity: grid mismatch");
  if (!(t1 < t2)) throw std::invalid_argument("green_identity: need t1 < t2");
  const int k1 = u.index_of_time(t1);
  const int k2 = u.index_of_time(t2);

  // phi must vanish on the shell over the window.
  for (const auto& sc : ball.shell) {
    const auto x = g.center(sc.cell);
    for (int k = k1; k <= k2; ++k) {
      if (std::abs(phi.value(x, u.time(k))) > 1e-12)
        throw std::invalid_argument("green_identity: test function nonzero on the shell");
    }
  }

  GreenIdentityTerms terms;
  const double vol = g.cell_volume();

  auto pairing = [&](int k) {
    const auto& sl = u.slice(k);
    const double t = u.time(k);
    double s = 0.0;
    for (int cell : ball.interior)
      s += sl[static_cast<size_t>(cell)] * phi.value(g.center(cell), t);
    return s * vol;
  };
  terms.end_pairing = pairing(k2);
  terms.start_pairing = pairing(k1);

  // Shell flux term: alpha(u) at shell cells against the exact normal
  // derivative of phi, surface-weighted, midpoint in time.
  for (int k = k1; k < k2; ++k) {
    const double tm = 0.5 * (u.time(k) + u.time(k + 1));
    const auto& a = u.slice(k);
    const auto& b = u.slice(k + 1);
    double ring = 0.0;
    for (const auto& sc : ball.shell) {
      const auto x = g.center(sc.cell);
      const auto grad = phi.space.gradient(x);
      const double rx = (x[0] - ball.center[0]) / sc.r;
      const double ry = g.dim == 2 ? (x[1] - ball.center[1]) / sc.r : 0.0;
      const double dphidn = (grad[0] * rx + grad[1] * ry) * phi.time.value(tm);
      if (dphidn == 0.0) continue;
      const double um = 0.5 * (a[static_cast<size_t>(sc.cell)] + b[static_cast<size_t>(sc.cell)]);
      ring += nl.eval(um) * dphidn * sc.sigma;
    }
    terms.shell_flux += ring * u.dt;
  }

  // Interior space-time terms, midpoint rule.
  for (int k = k1; k < k2; ++k) {
    const double tm = 0.5 * (u.time(k) + u.time(k + 1));
    const auto& a = u.slice(k);
    const auto& b = u.slice(k + 1);
    double sut = 0.0, slap = 0.0;
    for (int cell : ball.interior) {
      const auto x = g.center(cell);
      const double pt = phi.dt(x, tm);
      const double lp = phi.laplacian(x, tm);
      if (pt == 0.0 && lp == 0.0) continue;
      const double um = 0.5 * (a[static_cast<size_t>(cell)] + b[static_cast<size_t>(cell)]);
      sut += um * pt;
      slap += nl.eval(um) * lp;
    }
    terms.interior_ut += sut * vol * u.dt;
    terms.interior_lap += slap * vol * u.dt;
  }

  terms.residual = std::abs(terms.end_pairing - (terms.start_pairing - terms.shell_flux +
                                                 terms.interior_ut + terms.interior_lap));
  return terms;
}

double green_residual(const SpaceTimeField& u, const Nonlinearity& nl,
                      const SpaceTimeTestFunction& phi, const BallDomain& ball, double t1,
                      double t2) {
  return green_identity(u, nl, phi, ball, t1, t2).residual;
}

}  // namespace stefan
