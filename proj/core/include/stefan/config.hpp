#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stefan/calculus.hpp"
#include "stefan/grid.hpp"
#include "stefan/measure.hpp"
#include "stefan/mollify.hpp"
#include "stefan/nonlinearity.hpp"

namespace stefan {

/// Generic parsed value: number, string, array of numbers, or a table of
/// key/value pairs. The file syntax is line-oriented `key = value` with
/// `[...]` arrays, `{ k = v, ... }` inline tables, and `#` comments.
/// Repeated `atom` keys accumulate; other repeats are errors.
struct ConfigValue;
using ConfigTable = std::vector<std::pair<std::string, ConfigValue>>;

struct ConfigValue {
  std::variant<double, std::string, std::vector<double>, std::shared_ptr<ConfigTable>> v;

  bool is_number() const { return std::holds_alternative<double>(v); }
  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_array() const { return std::holds_alternative<std::vector<double>>(v); }
  bool is_table() const { return std::holds_alternative<std::shared_ptr<ConfigTable>>(v); }

  double num() const { return std::get<double>(v); }
  const std::string& str() const { return std::get<std::string>(v); }
  const std::vector<double>& arr() const { return std::get<std::vector<double>>(v); }
  const ConfigTable& table() const { return *std::get<std::shared_ptr<ConfigTable>>(v); }
};

struct BarrierBlock {
  double R = 10.0;
  double T = 1.0;
  int cells = 1800;
  double dt = 1e-3;
};

struct ThetaBlock {
  std::array<double, 2> center{0.0, 0.0};
  double radius = 0.8;
  double amplitude = 1.0;
};

struct CertifyBlock {
  double t0 = 1.0;
  double eps = 1.0;
  double eps_trace = -1.0;
  double eps_shell_early = -1.0;
  double eps_interior_early = -1.0;
  double eps_shell_late = -1.0;
  double eps_interior_late = -1.0;
  double dt_dual = -1.0;
  double l_min = -1.0;
  int m_cap = -1;
};

struct RepresentBlock {
  double R = 5.0;
  double t1 = 0.1;
  double t2 = 0.5;
  int testfn = 0;  // index into the built-in family
};

struct ConvergenceBlock {
  std::string kind = "neumann";  // "neumann" or "green"
  int levels = 3;
  double min_order = 0.8;
};

struct ExperimentConfig {
  // measure (optional; required by forward-like subcommands)
  std::optional<SignedMeasure> measure;

  // nonlinearity: defaults to the two-phase map
  std::optional<Nonlinearity> nonlinearity;

  // grid + time
  std::optional<Grid> grid;
  double T = 1.0;
  double dt = 1e-3;
  int store_every = 1;
  Boundary bc = Boundary::zero_flux;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;

  std::string out_dir;
  unsigned seed = 0;
  MollifierSpec::Scaling mollifier_scaling = MollifierSpec::Scaling::mass_normalized;

  std::optional<BarrierBlock> barrier;
  std::optional<ThetaBlock> theta;
  std::optional<CertifyBlock> certify;
  std::optional<RepresentBlock> represent;
  std::optional<ConvergenceBlock> convergence;

  Nonlinearity nl() const;
};

struct ParseOutcome {
  std::optional<ExperimentConfig> config;  // set when errors is empty
  std::vector<std::string> errors;         // every violation, not just the first
};

/// Parses and validates a config file in strict mode (unknown keys rejected).
ParseOutcome parse_config(const std::string& path);

/// Same on in-memory text (for tests).
ParseOutcome parse_config_text(const std::string& text);

}  // namespace stefan
