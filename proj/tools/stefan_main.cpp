// Command-line front end: forward runs, barrier tables, balance-identity
// checks, duality certificates, and convergence studies.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "stefan/barriers.hpp"
#include "stefan/calculus.hpp"
#include "stefan/config.hpp"
#include "stefan/csv.hpp"
#include "stefan/duality.hpp"
#include "stefan/forward.hpp"
#include "stefan/representation.hpp"

namespace fs = std::filesystem;
using namespace stefan;

namespace {

constexpr const char* kVersion = "stefan 0.1.0";

constexpr int kExitPass = 0;
constexpr int kExitNumericFail = 1;
constexpr int kExitConfigError = 2;

double wall_seconds(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_side_manifest(const std::string& out_path, const nlohmann::json& extra,
                         const std::string& config_hash, double wall_s) {
  nlohmann::json j = extra;
  j["version"] = kVersion;
  j["config_hash"] = config_hash;
  j["wall_time_s"] = wall_s;
  std::ofstream out(out_path);
  out << j.dump(2) << "\n";
}

ExperimentConfig load_config_or_exit(const std::string& path, int& rc) {
  auto outcome = parse_config(path);
  if (!outcome.config) {
    std::cerr << "config errors in " << path << ":\n";
    for (const auto& e : outcome.errors) std::cerr << "  - " << e << "\n";
    rc = kExitConfigError;
    return {};
  }
  rc = 0;
  return *outcome.config;
}

// Truncation-box rule: the Gaussian weight at the box edge, measured from the
// measure's support hull, must be below 1e-12.
std::string check_box_margin(const SignedMeasure& mu, const Grid& g) {
  if (mu.gauss_c <= 0) return {};
  double hull_lo[2] = {1e300, 1e300}, hull_hi[2] = {-1e300, -1e300};
  bool any = false;
  for (const auto& a : mu.atoms) {
    any = true;
    for (int ax = 0; ax < g.dim; ++ax) {
      hull_lo[ax] = std::min(hull_lo[ax], a.x[ax]);
      hull_hi[ax] = std::max(hull_hi[ax], a.x[ax]);
    }
  }
  if (mu.density) {
    any = true;
    for (int ax = 0; ax < g.dim; ++ax) {
      hull_lo[ax] = std::min(hull_lo[ax], mu.density->lo[ax]);
      hull_hi[ax] = std::max(hull_hi[ax], mu.density->hi[ax]);
    }
  }
  if (!any) return {};
  for (int ax = 0; ax < g.dim; ++ax) {
    const double dist = std::min(hull_lo[ax] - g.box_lo(ax), g.box_hi(ax) - hull_hi[ax]);
    if (dist < 0) return "measure support extends beyond the grid box";
    if (std::exp(-mu.gauss_c * dist * dist) > 1e-12) {
      std::ostringstream os;
      os << "truncation box too small: exp(-gauss_c*dist^2) = "
         << std::exp(-mu.gauss_c * dist * dist) << " > 1e-12 at axis " << ax
         << " (need more margin between the data support and the box edge)";
      return os.str();
    }
  }
  return {};
}

int cmd_forward(const std::string& config_path, std::string out_dir) {
  const auto start = std::chrono::steady_clock::now();
  int rc = 0;
  ExperimentConfig cfg = load_config_or_exit(config_path, rc);
  if (rc) return rc;
  if (!cfg.measure) {
    std::cerr << "forward: config must provide a measure (atom/density/gauss_c)\n";
    return kExitConfigError;
  }
  if (!cfg.grid) {
    std::cerr << "forward: config must provide dim/box/cells\n";
    return kExitConfigError;
  }
  if (out_dir.empty()) out_dir = cfg.out_dir;
  if (out_dir.empty()) {
    std::cerr << "forward: no output directory (--out or 'out' key)\n";
    return kExitConfigError;
  }
  const std::string margin_err = check_box_margin(*cfg.measure, *cfg.grid);
  if (!margin_err.empty()) {
    std::cerr << "forward: " << margin_err << "\n";
    return kExitConfigError;
  }

  SolveConfig sc;
  sc.grid = *cfg.grid;
  sc.T = cfg.T;
  sc.dt = cfg.dt;
  sc.bc = cfg.bc;
  sc.newton_tol = cfg.newton_tol;
  sc.newton_max_iter = cfg.newton_max_iter;
  sc.store_every = cfg.store_every;

  try {
    const Nonlinearity nl = cfg.nl();
    RunResult res = run(*cfg.measure, sc, nl);

    RunManifest m;
    m.dt = cfg.dt;
    m.T = cfg.T;
    m.store_every = cfg.store_every;
    m.newton_tol = cfg.newton_tol;
    m.newton_max_iter = cfg.newton_max_iter;
    m.boundary = cfg.bc == Boundary::zero_flux ? "zero_flux" : "dirichlet_zero";
    m.gauss_c = cfg.measure->gauss_c;
    m.slope_at_infinity = nl.slope_at_infinity();
    m.offset_bound = nl.offset_bound();
    m.breakpoints = nl.breakpoints();
    m.config_hash = fnv1a_hex(read_file(config_path));
    m.total_steps = res.total_steps;
    m.newton_iter_total = res.newton_iter_total;
    m.fallback_steps = res.fallback_steps;
    m.mass_ledger = res.mass_ledger;
    m.wall_time_s = wall_seconds(start);
    write_run_dir(res.history, m, out_dir);
    std::cout << "forward: " << res.total_steps << " steps, " << res.history.steps()
              << " stored slices -> " << out_dir << "\n";
    return kExitPass;
  } catch (const std::exception& e) {
    std::cerr << "forward: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_barrier_table(double R, double T, int cells, double dt, const std::string& out_csv,
                      const std::string& config_path) {
  const auto start = std::chrono::steady_clock::now();
  std::string hash;
  if (!config_path.empty()) {
    int rc = 0;
    ExperimentConfig cfg = load_config_or_exit(config_path, rc);
    if (rc) return rc;
    if (cfg.barrier) {
      R = cfg.barrier->R;
      T = cfg.barrier->T;
      cells = cfg.barrier->cells;
      dt = cfg.barrier->dt;
    }
    hash = fnv1a_hex(read_file(config_path));
  }
  if (R <= 1.0 || T <= 0 || cells < 3 || dt <= 0) {
    std::cerr << "barrier-table: need R > 1, T > 0, cells >= 3, dt > 0\n";
    return kExitConfigError;
  }
  try {
    BarrierParams p{R, T, cells, dt};
    SpaceTimeField w = solve_profile(p);
    FluxBoundReport rep = check_flux_bound(w, p);

    std::ofstream out(out_csv);
    if (!out) {
      std::cerr << "barrier-table: cannot write " << out_csv << "\n";
      return kExitConfigError;
    }
    out << "t,numeric_flux,closed_form_flux,envelope\n";
    for (size_t i = 0; i < rep.times.size(); ++i) {
      char line[160];
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", rep.times[i],
                    rep.numeric_flux[i], rep.closed_form_flux[i], rep.envelope[i]);
      out << line;
    }
    nlohmann::json extra;
    extra["subcommand"] = "barrier-table";
    extra["R"] = R;
    extra["T"] = T;
    extra["cells"] = cells;
    extra["dt"] = dt;
    extra["pass"] = rep.pass;
    extra["slack"] = rep.slack;
    extra["worst_margin"] = rep.worst_margin;
    extra["admissible_radius"] = admissible_radius(T);
    // whether the sharper constant-1 envelope also dominates the closed form
    // on this scan (observed, not asserted)
    bool constant_one_holds = true;
    for (size_t i = 0; i < rep.times.size(); ++i) {
      if (rep.closed_form_flux[i] >
          std::exp(-R * R / (8.0 * rep.times[i])))
        constant_one_holds = false;
    }
    extra["constant_one_envelope_holds"] = constant_one_holds;
    write_side_manifest(out_csv + ".manifest.json", extra, hash, wall_seconds(start));
    std::cout << "barrier-table: " << rep.times.size() << " rows, "
              << (rep.pass ? "flux bounded by envelope" : "envelope violated") << "\n";
    return rep.pass ? kExitPass : kExitNumericFail;
  } catch (const std::exception& e) {
    std::cerr << "barrier-table: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_represent_check(const std::string& run_dir, double R, double t1, double t2, int testfn,
                        double tol, const std::string& out_csv) {
  const auto start = std::chrono::steady_clock::now();
  try {
    LoadedRun run = read_run_dir(run_dir);
    Nonlinearity nl = run.manifest.breakpoints.empty()
                          ? Nonlinearity::two_phase()
                          : Nonlinearity(run.manifest.breakpoints,
                                         run.manifest.slope_at_infinity,
                                         run.manifest.offset_bound);
    BallDomain ball(run.history.grid, R);
    auto family = builtin_test_functions(run.history.grid.dim, R);
    if (testfn < 0 || testfn >= static_cast<int>(family.size())) {
      std::cerr << "represent-check: testfn index out of range (0.."
                << family.size() - 1 << ")\n";
      return kExitConfigError;
    }
    GreenIdentityTerms terms = green_identity(run.history, nl, family[static_cast<size_t>(testfn)],
                                              ball, t1, t2);
    std::printf("end_pairing      % .12e\n", terms.end_pairing);
    std::printf("start_pairing    % .12e\n", terms.start_pairing);
    std::printf("shell_flux       % .12e\n", terms.shell_flux);
    std::printf("interior_ut      % .12e\n", terms.interior_ut);
    std::printf("interior_lap     % .12e\n", terms.interior_lap);
    std::printf("residual         % .12e\n", terms.residual);
    if (!out_csv.empty()) {
      std::ofstream out(out_csv);
      out << "end_pairing,start_pairing,shell_flux,interior_ut,interior_lap,residual\n";
      char line[256];
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    terms.end_pairing, terms.start_pairing, terms.shell_flux, terms.interior_ut,
                    terms.interior_lap, terms.residual);
      out << line;
      nlohmann::json extra;
      extra["subcommand"] = "represent-check";
      extra["run"] = run_dir;
      extra["R"] = R;
      extra["t1"] = t1;
      extra["t2"] = t2;
      extra["testfn"] = testfn;
      write_side_manifest(out_csv + ".manifest.json", extra, run.manifest.config_hash,
                          wall_seconds(start));
    }
    if (tol > 0 && terms.residual > tol) return kExitNumericFail;
    return kExitPass;
  } catch (const std::exception& e) {
    std::cerr << "represent-check: " << e.what() << "\n";
    return kExitConfigError;
  }
}

bool parse_theta_spec(const std::string& spec, ThetaBlock& t) {
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) return false;
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    try {
      if (key == "radius") {
        t.radius = std::stod(val);
      } else if (key == "amplitude") {
        t.amplitude = std::stod(val);
      } else if (key == "center") {
        std::stringstream cs(val);
        std::string c;
        int i = 0;
        while (std::getline(cs, c, ',') && i < 2) t.center[static_cast<size_t>(i++)] = std::stod(c);
      } else {
        return false;
      }
    } catch (...) {
      return false;
    }
  }
  return true;
}

int cmd_dual_certify(const std::string& runA, const std::string& runB,
                     const std::string& theta_spec, double t0, double eps_total,
                     const std::string& out_csv, double gauss_c_flag, double dt_dual,
                     double l_min) {
  const auto start = std::chrono::steady_clock::now();
  try {
    LoadedRun A = read_run_dir(runA);
    LoadedRun B = read_run_dir(runB);

    Nonlinearity nl = A.manifest.breakpoints.empty()
                          ? Nonlinearity::two_phase()
                          : Nonlinearity(A.manifest.breakpoints, A.manifest.slope_at_infinity,
                                         A.manifest.offset_bound);

    // Put both runs on a common mesh: restrict the finer to the coarser.
    SpaceTimeField u = A.history;
    SpaceTimeField v = B.history;
    if (!(u.grid == v.grid)) {
      if (u.grid.cells[0] == 2 * v.grid.cells[0])
        u = restrict_to_coarse(u, v.grid);
      else if (v.grid.cells[0] == 2 * u.grid.cells[0])
        v = restrict_to_coarse(v, u.grid);
      else {
        std::cerr << "dual-certify: run grids are neither equal nor factor-2 nested\n";
        return kExitConfigError;
      }
    }

    double gauss_c = gauss_c_flag > 0 ? gauss_c_flag : A.manifest.gauss_c;
    if (gauss_c <= 0) gauss_c = B.manifest.gauss_c;
    if (gauss_c <= 0) {
      std::cerr << "dual-certify: no gauss_c in run manifests; pass --gauss-c\n";
      return kExitConfigError;
    }

    ThetaBlock tb;
    if (!theta_spec.empty() && !parse_theta_spec(theta_spec, tb)) {
      std::cerr << "dual-certify: malformed --theta spec (use radius=..;amplitude=..;center=..)\n";
      return kExitConfigError;
    }
    SpatialBump bump;
    bump.dim = u.grid.dim;
    bump.center = tb.center;
    bump.radius = tb.radius;
    bump.amplitude = tb.amplitude;
    Field theta = bump.sample(u.grid);

    CertifyBudgets eps;
    eps.total = eps_total;
    CertifyOptions opt;
    opt.dt_dual = dt_dual;
    opt.L_min = l_min;

    CertificateReport rep = certify(u, v, theta, t0, eps, gauss_c, nl);
    write_report_csv(rep, out_csv);

    nlohmann::json extra;
    extra["subcommand"] = "dual-certify";
    extra["runA"] = runA;
    extra["runB"] = runB;
    extra["t0"] = t0;
    extra["eps"] = eps_total;
    extra["gauss_c"] = gauss_c;
    extra["schedule"] = {{"R", rep.R},       {"delta", rep.delta}, {"m", rep.m},
                         {"gamma", rep.gamma}, {"dt_dual", rep.dt_dual}};
    extra["certified_bound"] = rep.certified_bound;
    extra["direct_pairing"] = rep.direct_pairing;
    extra["outer_residual"] = rep.outer_residual;
    extra["inner_residual"] = rep.inner_residual;
    extra["energy_residual"] = rep.energy.residual;
    extra["max_principle_margin"] = rep.max_principle_margin;
    extra["binding_cap"] = rep.binding_cap;
    extra["obstruction"] = rep.obstruction;
    extra["notes"] = rep.notes;
    extra["identical_inputs"] = rep.identical_inputs;
    extra["pass"] = rep.pass;
    extra["m_sweep"] = {{"m", rep.m_values}, {"j", rep.m_j}, {"bound", rep.m_bound}};
    extra["gamma_sweep"] = {{"gamma", rep.gamma_values},
                            {"shift", rep.gamma_shift},
                            {"pairing", rep.gamma_pairing}};
    write_side_manifest(out_csv + ".manifest.json", extra,
                        A.manifest.config_hash + ":" + B.manifest.config_hash,
                        wall_seconds(start));

    std::cout << "dual-certify: certified bound " << rep.certified_bound << " ("
              << (rep.pass ? "PASS" : "FAIL") << ")";
    if (!rep.obstruction.empty()) std::cout << " obstruction: " << rep.obstruction;
    if (!rep.binding_cap.empty()) std::cout << " [" << rep.binding_cap << "]";
    std::cout << "\n";
    return rep.pass ? kExitPass : kExitNumericFail;
  } catch (const std::exception& e) {
    std::cerr << "dual-certify: " << e.what() << "\n";
    return kExitConfigError;
  }
}

// ---- convergence studies ----

// Interface position of the classical two-phase similarity flow: lambda
// solves thetaL/(1+erf(l)) - thetaS/(1-erf(l)) = 2 sqrt(pi) l exp(l^2).
double similarity_lambda(double thetaL, double thetaS) {
  auto G = [&](double l) {
    return thetaL / (1.0 + std::erf(l)) - thetaS / (1.0 - std::erf(l)) -
           2.0 * std::sqrt(M_PI) * l * std::exp(l * l);
  };
  double lo = 0.0, hi = 2.0;
  while (G(hi) > 0) hi += 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (G(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Melted-fraction front: each partially-melted cell contributes (u+1)/2 of a
// cell width past the last fully liquid cell.
double interface_position(const Field& u) {
  const Grid& g = u.grid;
  for (int i = 0; i + 1 < g.cells[0]; ++i) {
    if (u[i] >= 1.0 && u[i + 1] < 1.0) {
      double x = g.center(i, 0) + 0.5 * g.h;
      int j = i + 1;
      while (j < g.cells[0] && u[j] > -1.0 && j - i <= 8) {
        x += (u[j] + 1.0) / 2.0 * g.h;
        ++j;
      }
      return x;
    }
  }
  return g.box_lo(0);
}

int cmd_convergence(const std::string& config_path) {
  int rc = 0;
  ExperimentConfig cfg = load_config_or_exit(config_path, rc);
  if (rc) return rc;
  if (!cfg.convergence) {
    std::cerr << "convergence: config must provide a convergence block\n";
    return kExitConfigError;
  }
  const auto& cb = *cfg.convergence;
  const Nonlinearity nl = cfg.nl();

  try {
    if (cb.kind == "neumann") {
      const double A = 7.0, Ap = 1.5;  // u = A left, -Ap right of the interface
      const double lambda = similarity_lambda(A - 1.0, Ap - 1.0);
      const double Tend = 0.25;
      const double x_if = 0.1234;  // off-grid initial interface
      std::vector<double> errors;
      int n = 200;
      for (int lev = 0; lev < cb.levels; ++lev, n *= 2) {
        Grid g = Grid::make_1d(-4.0, 4.0, n);
        // exact cell averages of the step datum (mass-exact front placement)
        Field u0(g);
        for (int i = 0; i < g.size(); ++i) {
          const double lo = g.box_lo(0) + i * g.h;
          const double frac = std::min(1.0, std::max(0.0, (x_if - lo) / g.h));
          u0[i] = frac * A + (1.0 - frac) * (-Ap);
        }
        SolveConfig sc;
        sc.grid = g;
        const int steps = 512 * (1 << (2 * lev));
        sc.dt = Tend / steps;
        sc.T = Tend;
        sc.store_every = steps / 16;
        RunResult res = run_from(u0, sc, nl);
        double acc = 0.0;
        int cnt = 0;
        for (int k = res.history.steps() / 2; k < res.history.steps(); ++k) {
          const double exact =
              x_if + 2.0 * lambda * std::sqrt(res.history.time(k));
          acc += std::abs(interface_position(res.history.field_at(k)) - exact);
          ++cnt;
        }
        errors.push_back(acc / cnt);
        std::printf("level %d  h=%.5g  interface error %.6e\n", lev, g.h, errors.back());
      }
      double order_sum = 0.0;
      for (size_t i = 0; i + 1 < errors.size(); ++i)
        order_sum += std::log2(errors[i] / errors[i + 1]);
      const double order = order_sum / static_cast<double>(errors.size() - 1);
      std::printf("measured order %.3f (threshold %.3f)\n", order, cb.min_order);
      return order >= cb.min_order ? kExitPass : kExitNumericFail;
    }

    // green: identity residual under simultaneous (h, dt) halving
    if (!cfg.measure || !cfg.grid) {
      std::cerr << "convergence: green study needs measure and grid\n";
      return kExitConfigError;
    }
    const double Rball = cfg.represent ? cfg.represent->R : 5.0;
    const double t1 = cfg.represent ? cfg.represent->t1 : 0.1;
    const double t2 = cfg.represent ? cfg.represent->t2 : 0.5;
    std::vector<double> worst_order;
    auto family = builtin_test_functions(cfg.grid->dim, Rball);
    std::vector<std::vector<double>> residuals(family.size());
    for (int lev = 0; lev < cb.levels; ++lev) {
      const int factor = 1 << lev;
      Grid g = *cfg.grid;
      g = Grid(g.dim, g.origin, g.h / factor,
               {g.cells[0] * factor, g.dim == 2 ? g.cells[1] * factor : 1});
      SolveConfig sc;
      sc.grid = g;
      sc.dt = cfg.dt / factor;
      sc.T = cfg.T;
      sc.store_every = cfg.store_every;
      RunResult res = run(*cfg.measure, sc, nl);
      BallDomain ball(g, Rball);
      for (size_t f = 0; f < family.size(); ++f)
        residuals[f].push_back(green_residual(res.history, nl, family[f], ball, t1, t2));
    }
    bool ok = true;
    for (size_t f = 0; f < family.size(); ++f) {
      double order_sum = 0.0;
      for (size_t i = 0; i + 1 < residuals[f].size(); ++i)
        order_sum += std::log2(residuals[f][i] / residuals[f][i + 1]);
      const double order = order_sum / static_cast<double>(residuals[f].size() - 1);
      std::printf("testfn %zu  residuals", f);
      for (double r : residuals[f]) std::printf(" %.3e", r);
      std::printf("  order %.3f\n", order);
      ok = ok && order >= cb.min_order;
    }
    return ok ? kExitPass : kExitNumericFail;
  } catch (const std::exception& e) {
    std::cerr << "convergence: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase enthalpy solver with duality-based closeness certificates"};
  app.require_subcommand(1);
  app.footer(
      "Config file keys (line-oriented `key = value`, arrays in [..], inline tables in {..},\n"
      "# comments, unknown keys fatal):\n"
      "  atom = [x, w] | [x, y, w]     point mass (repeatable)\n"
      "  density = { box = [..], values = [..], cells = [..] }  piecewise-constant part\n"
      "  gauss_c = <float>             Gaussian moment exponent of the data\n"
      "  nonlinearity = two_phase | identity | { breakpoints = [u1, a1, ...], a, b }\n"
      "  dim = 1|2   box = [lo, hi] | [lox, loy, hix, hiy]   cells = [n] | [nx, ny]\n"
      "  T, dt, store_every            horizon, step, slice thinning\n"
      "  boundary = zero_flux | dirichlet_zero\n"
      "  newton_tol, newton_max_iter   per-step solver controls\n"
      "  out = \"dir\"                   output directory\n"
      "  seed = <int>                  randomized placements\n"
      "  mollifier_scaling = mass_normalized | single_power\n"
      "  barrier = { R, T, cells, dt }\n"
      "  theta = { center = [..], radius, amplitude }\n"
      "  certify = { t0, eps, eps_trace, eps_shell_early, eps_interior_early,\n"
      "              eps_shell_late, eps_interior_late, dt_dual, l_min, m_cap }\n"
      "  represent = { R, t1, t2, testfn }\n"
      "  convergence = { kind = neumann|green, levels, min_order }\n"
      "Constraints: T <= 1/(4 gauss_c); certify.t0 < min(1/(8 gauss_c), T); forward data\n"
      "must satisfy exp(-gauss_c dist^2) <= 1e-12 at the box edge.");

  // forward
  auto* fwd = app.add_subcommand("forward", "Run the implicit enthalpy solver from measure data");
  std::string fwd_config, fwd_out;
  fwd->add_option("--config", fwd_config, "Config file (measure, grid, T, dt, ...)")->required();
  fwd->add_option("--out", fwd_out, "Output directory (overrides the 'out' config key)");

  // barrier-table
  auto* bt = app.add_subcommand("barrier-table",
                                "Tabulate the profile flux against the Gaussian envelope");
  double bt_R = 10.0, bt_T = 1.0, bt_dt = 1e-3;
  int bt_cells = 1800;
  std::string bt_out = "barrier_table.csv", bt_config;
  bt->add_option("--R", bt_R, "Outer radius (> 1)");
  bt->add_option("--T", bt_T, "Time horizon");
  bt->add_option("--cells", bt_cells, "Spatial intervals on [1, R]");
  bt->add_option("--dt", bt_dt, "Time step");
  bt->add_option("--out", bt_out, "Output CSV path")->required();
  bt->add_option("--config", bt_config, "Optional config file with a barrier block");

  // represent-check
  auto* rcheck = app.add_subcommand("represent-check",
                                    "Evaluate the windowed balance identity on a stored run");
  std::string rc_run, rc_out;
  double rc_R = 5.0, rc_t1 = 0.1, rc_t2 = 0.5, rc_tol = -1.0;
  int rc_testfn = 0;
  rcheck->add_option("--run", rc_run, "Forward-run directory")->required();
  rcheck->add_option("--R", rc_R, "Ball radius")->required();
  rcheck->add_option("--t1", rc_t1, "Window start (stored time)")->required();
  rcheck->add_option("--t2", rc_t2, "Window end (stored time)")->required();
  rcheck->add_option("--testfn", rc_testfn, "Built-in test function index (0..4)");
  rcheck->add_option("--tol", rc_tol, "Fail (exit 1) when the residual exceeds this");
  rcheck->add_option("--out", rc_out, "Optional CSV output path");

  // dual-certify
  auto* dc = app.add_subcommand("dual-certify",
                                "Certify closeness of two runs through the dual problem");
  std::string dc_runA, dc_runB, dc_theta, dc_out = "report.csv";
  double dc_t0 = 1.0, dc_eps = 1.0, dc_gauss = -1.0, dc_dtdual = -1.0, dc_lmin = -1.0;
  dc->add_option("--runA", dc_runA, "First run directory")->required();
  dc->add_option("--runB", dc_runB, "Second run directory")->required();
  dc->add_option("--theta", dc_theta,
                 "Target test function, e.g. \"radius=0.8;amplitude=1;center=0\"");
  dc->add_option("--t0", dc_t0, "Target time (< min(1/(8 gauss_c), T))")->required();
  dc->add_option("--eps", dc_eps, "Total certificate budget")->required();
  dc->add_option("--out", dc_out, "Report CSV path")->required();
  dc->add_option("--gauss-c", dc_gauss, "Gaussian exponent (default: run manifest)");
  dc->add_option("--dt-dual", dc_dtdual, "Dual solve time step (default: h^2/2 snapped)");
  dc->add_option("--l-min", dc_lmin, "Smallest radius considered in the shell scan");

  // convergence
  auto* cv = app.add_subcommand("convergence", "Refinement studies (neumann or green)");
  std::string cv_config;
  cv->add_option("--config", cv_config, "Config file with a convergence block")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help; map parse failures to the config-error code.
    return code == 0 ? 0 : kExitConfigError;
  }

  if (app.got_subcommand(fwd)) return cmd_forward(fwd_config, fwd_out);
  if (app.got_subcommand(bt))
    return cmd_barrier_table(bt_R, bt_T, bt_cells, bt_dt, bt_out, bt_config);
  if (app.got_subcommand(rcheck))
    return cmd_represent_check(rc_run, rc_R, rc_t1, rc_t2, rc_testfn, rc_tol, rc_out);
  if (app.got_subcommand(dc))
    return cmd_dual_certify(dc_runA, dc_runB, dc_theta, dc_t0, dc_eps, dc_out, dc_gauss,
                            dc_dtdual, dc_lmin);
  if (app.got_subcommand(cv)) return cmd_convergence(cv_config);
  return kExitConfigError;
}
