#pragma once

#include <string>
#include <vector>

#include "stefan/grid.hpp"
#include "stefan/mollify.hpp"
#include "stefan/nonlinearity.hpp"

namespace stefan {

/// Cellwise quotient (alpha(u) - alpha(v)) / (u - v), 0 where u == v exactly.
/// u and v must share grid and time lattice. Values lie in [0, Lipschitz].
SpaceTimeField difference_quotient_field(const SpaceTimeField& u, const SpaceTimeField& v,
                                         const Nonlinearity& nl);

/// Floor at 1/m, then smooth with the space-time kernel at scale 1/m
/// (mass-normalized, mirrored at the domain edges).
struct DualCoefficient {
  SpaceTimeField c;   // raw quotient
  SpaceTimeField cm;  // floored and smoothed, >= 1/m up to rounding
  int m = 1;
  double j_value = 0.0;  // integral of |c - cm|^2 / cm over the stored box
};

DualCoefficient floor_and_smooth(const SpaceTimeField& c, int m);

/// j restricted to the ball and a time window (stored-lattice quadrature).
double j_on(const DualCoefficient& dc, const BallDomain& ball, double t_lo, double t_hi);

/// Backward dual solve phi_t + cm * lap(phi) = 0 on the ball, phi(t0) = theta,
/// phi = 0 on the shell, implicit Euler down to t = delta. The coefficient is
/// read from dc.cm by linear interpolation in time. History on [delta, t0].
SpaceTimeField solve_dual(const DualCoefficient& dc, const Field& theta, const BallDomain& ball,
                          double t0, double delta, double dt);

/// Backward constant-coefficient solve q_t + a * lap(q) = 0 from
/// q(delta) = terminal down to t = 0 (same scheme, uniform coefficient a).
SpaceTimeField solve_backward_heat(const Field& terminal, const BallDomain& ball, double delta,
                                   double dt, double a = 1.0);

struct EnergyIdentity {
  double gradient_at_delta = 0.0;  // (1/2) ||grad phi(delta)||^2
  double dissipation = 0.0;        // sum cm |lap phi|^2 over the window
  double rhs = 0.0;                // (1/2) ||grad theta||^2
  double lhs = 0.0;                // gradient_at_delta + dissipation
  double residual = 0.0;           // rhs - lhs (>= 0 for the implicit scheme)
};

EnergyIdentity energy_identity(const SpaceTimeField& phi, const DualCoefficient& dc,
                               const Field& theta, const BallDomain& ball, double delta,
                               double t0);

struct TermValue {
  double value = 0.0;     // signed quadrature value
  double computed = 0.0;  // |value|
  double bound = 0.0;
  double slack = 0.0;
  bool pass = true;       // computed <= bound + slack
};

/// Late-window interior term over ball x (delta, t0):
/// int int lap(phi) [alpha(u)-alpha(v)] + phi_t [u-v], with the product bound
/// ||u-v||_inf * sqrt(dissipation) * sqrt(j) on the dual lattice.
TermValue interior_late_term(const SpaceTimeField& u, const SpaceTimeField& v,
                             const SpaceTimeField& phi, const DualCoefficient& dc,
                             const BallDomain& ball, double delta, double t0,
                             const Nonlinearity& nl);

/// Late-window shell term: - int int dphi/dn [alpha(u)-alpha(v)] over the
/// shell, bounded by the Gaussian envelope times the weighted boundary mass.
TermValue shell_late_term(const SpaceTimeField& u, const SpaceTimeField& v,
                          const SpaceTimeField& phi, const BallDomain& ball, double t0,
                          double delta, double gauss_c, const Nonlinearity& nl);

/// Early-window interior term over (gamma, delta) with the backward heat
/// continuation q; bound 2B sqrt(|B(R)| delta) sqrt((1/2)||grad theta||^2 / a).
TermValue interior_early_term(const SpaceTimeField& u, const SpaceTimeField& v,
                              const SpaceTimeField& q, const BallDomain& ball, double gamma,
                              double delta, const Field& theta, const Nonlinearity& nl);

/// Early-window shell term over (gamma, delta) for q, same envelope family.
TermValue shell_early_term(const SpaceTimeField& u, const SpaceTimeField& v,
                           const SpaceTimeField& q, const BallDomain& ball, double gamma,
                           double delta, double t0, double gauss_c, const Nonlinearity& nl);

struct TraceTerm {
  double value = 0.0;          // int (u-v)(gamma) q(gamma)
  double shift_part = 0.0;     // int (u-v)(gamma) (q(gamma) - q(0))
  double pairing_part = 0.0;   // int (u-v)(gamma) q(0)
  double shift_bound = 0.0;    // sup_t ||u-v||_L1 * max|q(gamma)-q(0)|
  double bound = 0.0;          // shift_bound + |pairing_part|
};

TraceTerm trace_term(const SpaceTimeField& u, const SpaceTimeField& v, const SpaceTimeField& q,
                     const BallDomain& ball, double gamma);

/// sup over stored slices of the L1(ball) difference.
double l1_uniform_bound(const SpaceTimeField& u, const SpaceTimeField& v, const BallDomain& ball);

/// Shell scan: weighted boundary integrals against the Chebyshev thresholds
/// M/R^n and M_diff/R^n plus envelope admissibility.
struct ShellScan {
  struct Entry {
    double R = 0.0;
    double shell_integral = 0.0;       // |alpha(u)|+|alpha(v)|, Gaussian weight
    double shell_integral_diff = 0.0;  // |alpha(u)-alpha(v)|, Gaussian weight
    double threshold = 0.0;            // M / R^n
    double threshold_diff = 0.0;       // M_diff / R^n
    bool barrier_ok = false;
    bool qualifies = false;
    double late_bound = 0.0;  // envelope-chain bound for the shell terms at this R
  };
  double M = 0.0;
  double M_diff = 0.0;
  std::vector<Entry> entries;
  int chosen = -1;  // smallest qualifying entry meeting the caller's budget
};

ShellScan choose_radius(const SpaceTimeField& u, const SpaceTimeField& v, const Nonlinearity& nl,
                        double gauss_c, double L_min, double t0, double budget = -1.0);

struct CertifyBudgets {
  double total = 1.0;
  // Per-term budgets; non-positive entries default to total/5.
  double trace = -1.0;
  double shell_early = -1.0;
  double interior_early = -1.0;
  double shell_late = -1.0;
  double interior_late = -1.0;

  double get_trace() const { return trace > 0 ? trace : total / 5.0; }
  double get_shell_early() const { return shell_early > 0 ? shell_early : total / 5.0; }
  double get_interior_early() const { return interior_early > 0 ? interior_early : total / 5.0; }
  double get_shell_late() const { return shell_late > 0 ? shell_late : total / 5.0; }
  double get_interior_late() const { return interior_late > 0 ? interior_late : total / 5.0; }
};

struct CertifyOptions {
  double dt_dual = -1.0;  // <= 0: max(stored dt / 4, h^2 / 2) snapped to t0/steps
  double L_min = -1.0;    // <= 0: auto from envelope admissibility and theta support
  int m_first = 4;
  int m_cap = -1;         // <= 0: largest power of two with 1/m >= 2h
  int gamma_max_candidates = 8;
};

struct CertifyTermRow {
  std::string name;
  double computed = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  double budget = 0.0;
  bool pass = true;
};

struct CertificateReport {
  // schedule
  double R = 0.0;
  double delta = 0.0;
  int m = 0;
  double gamma = 0.0;
  double t0 = 0.0;
  double dt_dual = 0.0;

  std::vector<CertifyTermRow> terms;  // trace, shell_early, interior_early, shell_late, interior_late
  double certified_bound = 0.0;       // sum of the five bounds
  double direct_pairing = 0.0;        // int (u-v)(t0) theta
  double outer_residual = 0.0;        // |direct - (I + shell_late + interior_late)|
  double inner_residual = 0.0;        // |I - (trace + shell_early + interior_early)|

  EnergyIdentity energy;
  double max_principle_margin = 0.0;  // max over slices of ||phi||_inf - ||theta||_inf
  bool dissipation_bounded = true;    // sum cm |lap phi|^2 <= (1/2)||grad theta||^2
  double l1_uniform = 0.0;

  // sweeps
  std::vector<double> m_values, m_j, m_bound;
  std::vector<double> gamma_values, gamma_shift, gamma_pairing;
  ShellScan scan;

  std::string binding_cap;   // nonempty when a budget was unreachable
  std::string obstruction;   // nonempty when the trace pairing does not vanish
  std::string notes;         // recorded modelling assumptions
  bool identical_inputs = false;
  bool pass = false;
};

/// Executes the parameter ordering: radius for the shell terms, then delta
/// for the early interior term, then the smoothing index m, then gamma for
/// the trace term; assembles the five-term certificate for
/// |int (u-v)(., t0) theta dx|.
CertificateReport certify(const SpaceTimeField& u, const SpaceTimeField& v, const Field& theta,
                          double t0, const CertifyBudgets& eps, double gauss_c,
                          const Nonlinearity& nl, const CertifyOptions& opt = {});

/// Extracts the window [t_lo, t_hi] (stored-lattice endpoints) re-based to
/// start at time 0; used to chain certificates over successive windows.
SpaceTimeField window_slice(const SpaceTimeField& u, double t_lo, double t_hi);

}  // namespace stefan
