#include "stefan/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stefan {

Nonlinearity ExperimentConfig::nl() const {
  return nonlinearity ? *nonlinearity : Nonlinearity::two_phase();
}

namespace {

struct Parser {
  const std::string& text;
  size_t pos = 0;
  int line = 1;
  std::vector<std::string>& errors;

  explicit Parser(const std::string& t, std::vector<std::string>& errs)
      : text(t), errors(errs) {}

  void fail(const std::string& msg) {
    errors.push_back("line " + std::to_string(line) + ": " + msg);
  }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos;
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos;
    }
  }

  void skip_ws_and_newlines() {
    for (;;) {
      skip_inline_ws();
      if (!eof() && peek() == '\n') {
        ++pos;
        ++line;
        continue;
      }
      return;
    }
  }

  std::string read_key() {
    skip_inline_ws();
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      key.push_back(peek());
      ++pos;
    }
    return key;
  }

  bool expect(char c) {
    skip_inline_ws();
    if (!eof() && peek() == c) {
      ++pos;
      return true;
    }
    fail(std::string("expected '") + c + "'");
    return false;
  }

  std::optional<double> read_number() {
    skip_inline_ws();
    const size_t start = pos;
    while (!eof() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '+' ||
                      peek() == '-' || peek() == '.' || peek() == 'e' || peek() == 'E'))
      ++pos;
    if (pos == start) {
      fail("expected a number");
      return std::nullopt;
    }
    try {
      size_t used = 0;
      const std::string tok = text.substr(start, pos - start);
      const double val = std::stod(tok, &used);
      if (used != tok.size()) {
        fail("malformed number '" + tok + "'");
        return std::nullopt;
      }
      return val;
    } catch (...) {
      fail("malformed number");
      return std::nullopt;
    }
  }

  std::optional<ConfigValue> read_value() {
    skip_inline_ws();
    if (eof()) {
      fail("missing value");
      return std::nullopt;
    }
    const char c = peek();
    if (c == '[') {
      ++pos;
      std::vector<double> vals;
      skip_ws_and_newlines();
      if (!eof() && peek() == ']') {
        ++pos;
        return ConfigValue{vals};
      }
      for (;;) {
        auto n = read_number();
        if (!n) return std::nullopt;
        vals.push_back(*n);
        skip_ws_and_newlines();
        if (!eof() && peek() == ',') {
          ++pos;
          skip_ws_and_newlines();
          continue;
        }
        if (!eof() && peek() == ']') {
          ++pos;
          return ConfigValue{vals};
        }
        fail("expected ',' or ']' in array");
        return std::nullopt;
      }
    }
    if (c == '{') {
      ++pos;
      auto table = std::make_shared<ConfigTable>();
      skip_ws_and_newlines();
      if (!eof() && peek() == '}') {
        ++pos;
        return ConfigValue{table};
      }
      for (;;) {
        skip_ws_and_newlines();
        const std::string key = read_key();
        if (key.empty()) {
          fail("expected a key inside '{...}'");
          return std::nullopt;
        }
        if (!expect('=')) return std::nullopt;
        auto val = read_value();
        if (!val) return std::nullopt;
        table->emplace_back(key, *val);
        skip_ws_and_newlines();
        if (!eof() && peek() == ',') {
          ++pos;
          continue;
        }
        if (!eof() && peek() == '}') {
          ++pos;
          return ConfigValue{table};
        }
        fail("expected ',' or '}' in table");
        return std::nullopt;
      }
    }
    if (c == '"') {
      ++pos;
      std::string s;
      while (!eof() && peek() != '"' && peek() != '\n') {
        s.push_back(peek());
        ++pos;
      }
      if (eof() || peek() != '"') {
        fail("unterminated string");
        return std::nullopt;
      }
      ++pos;
      return ConfigValue{s};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
        s.push_back(peek());
        ++pos;
      }
      return ConfigValue{s};
    }
    auto n = read_number();
    if (!n) return std::nullopt;
    return ConfigValue{*n};
  }

  ConfigTable parse_top() {
    ConfigTable table;
    for (;;) {
      skip_ws_and_newlines();
      if (eof()) break;
      const std::string key = read_key();
      if (key.empty()) {
        fail("expected a key");
        // resynchronize: skip to end of line
        while (!eof() && peek() != '\n') ++pos;
        continue;
      }
      if (!expect('=')) {
        while (!eof() && peek() != '\n') ++pos;
        continue;
      }
      auto val = read_value();
      if (!val) {
        while (!eof() && peek() != '\n') ++pos;
        continue;
      }
      table.emplace_back(key, *val);
      skip_inline_ws();
      if (!eof() && peek() != '\n') fail("trailing characters after value for '" + key + "'");
      while (!eof() && peek() != '\n') ++pos;
    }
    return table;
  }
};

// ---- validation helpers ----

class Validator {
 public:
  explicit Validator(std::vector<std::string>& errors) : errors_(errors) {}

  void err(const std::string& m) { errors_.push_back(m); }

  std::optional<double> number(const ConfigValue& v, const std::string& key) {
    if (!v.is_number()) {
      err("key '" + key + "' must be a number");
      return std::nullopt;
    }
    return v.num();
  }

  std::optional<int> integer(const ConfigValue& v, const std::string& key) {
    auto n = number(v, key);
    if (!n) return std::nullopt;
    const long r = std::lround(*n);
    if (std::abs(*n - static_cast<double>(r)) > 1e-9) {
      err("key '" + key + "' must be an integer");
      return std::nullopt;
    }
    return static_cast<int>(r);
  }

 private:
  std::vector<std::string>& errors_;
};

void apply_table(const ConfigTable& top, ExperimentConfig& cfg, std::vector<std::string>& errors) {
  Validator val(errors);
  std::vector<SignedMeasure::Atom> atoms;
  std::optional<SignedMeasure::Density> density;
  std::optional<double> gauss_c;
  std::optional<int> dim;
  std::optional<std::vector<double>> box;
  std::optional<std::vector<double>> cells;
  std::map<std::string, int> seen;

  for (const auto& [key, value] : top) {
    if (key != "atom" && ++seen[key] > 1) {
      errors.push_back("duplicate key '" + key + "'");
      continue;
    }
    if (key == "atom") {
      if (!value.is_array() || (value.arr().size() != 2 && value.arr().size() != 3)) {
        errors.push_back("'atom' must be [x, weight] or [x, y, weight]");
        continue;
      }
      SignedMeasure::Atom a;
      const auto& arr = value.arr();
      if (arr.size() == 2) {
        a.x = {arr[0], 0.0};
        a.weight = arr[1];
      } else {
        a.x = {arr[0], arr[1]};
        a.weight = arr[2];
      }
      atoms.push_back(a);
    } else if (key == "density") {
      if (!value.is_table()) {
        errors.push_back("'density' must be a table { box = [...], values = [...] }");
        continue;
      }
      SignedMeasure::Density d;
      bool ok = true;
      std::optional<std::vector<double>> dcells;
      for (const auto& [k2, v2] : value.table()) {
        if (k2 == "box" && v2.is_array()) {
          const auto& b = v2.arr();
          if (b.size() == 2) {
            d.dim = 1;
            d.lo = {b[0], 0.0};
            d.hi = {b[1], 0.0};
          } else if (b.size() == 4) {
            d.dim = 2;
            d.lo = {b[0], b[1]};
            d.hi = {b[2], b[3]};
          } else {
            errors.push_back("'density.box' must have 2 or 4 entries");
            ok = false;
          }
        } else if (k2 == "values" && v2.is_array()) {
          d.values = v2.arr();
        } else if (k2 == "cells" && v2.is_array()) {
          dcells = v2.arr();
        } else {
          errors.push_back("unknown or malformed key 'density." + k2 + "'");
          ok = false;
        }
      }
      if (d.values.empty()) {
        errors.push_back("'density.values' is required and must be nonempty");
        ok = false;
      }
      if (ok) {
        if (dcells) {
          if (dcells->size() != static_cast<size_t>(d.dim)) {
            errors.push_back("'density.cells' must have one entry per dimension");
            ok = false;
          } else {
            d.cells[0] = static_cast<int>((*dcells)[0]);
            d.cells[1] = d.dim == 2 ? static_cast<int>((*dcells)[1]) : 1;
          }
        } else if (d.dim == 1) {
          d.cells = {static_cast<int>(d.values.size()), 1};
        } else {
          errors.push_back("'density.cells' is required for 2D densities");
          ok = false;
        }
      }
      if (ok && d.values.size() !=
                    static_cast<size_t>(d.cells[0]) * static_cast<size_t>(d.cells[1])) {
        errors.push_back("'density.values' length must equal the cell count");
        ok = false;
      }
      if (ok) density = d;
    } else if (key == "gauss_c") {
      if (auto n = val.number(value, key)) {
        if (*n <= 0)
          errors.push_back("'gauss_c' must be positive");
        else
          gauss_c = *n;
      }
    } else if (key == "nonlinearity") {
      if (value.is_string()) {
        if (value.str() == "two_phase")
          cfg.nonlinearity = Nonlinearity::two_phase();
        else if (value.str() == "identity")
          cfg.nonlinearity = Nonlinearity::identity();
        else
          errors.push_back("unknown nonlinearity '" + value.str() + "'");
      } else if (value.is_table()) {
        std::vector<std::pair<double, double>> bp;
        double a = 1.0, b = 1.0;
        for (const auto& [k2, v2] : value.table()) {
          if (k2 == "breakpoints" && v2.is_array()) {
            const auto& arr = v2.arr();
            if (arr.size() % 2 != 0 || arr.empty()) {
              errors.push_back("'nonlinearity.breakpoints' must be [u1, a1, u2, a2, ...]");
            } else {
              for (size_t i = 0; i + 1 < arr.size(); i += 2) bp.emplace_back(arr[i], arr[i + 1]);
            }
          } else if (k2 == "a" && v2.is_number()) {
            a = v2.num();
          } else if (k2 == "b" && v2.is_number()) {
            b = v2.num();
          } else {
            errors.push_back("unknown or malformed key 'nonlinearity." + k2 + "'");
          }
        }
        if (!bp.empty()) {
          try {
            cfg.nonlinearity = Nonlinearity(bp, a, b);
          } catch (const std::exception& e) {
            errors.push_back(std::string("invalid nonlinearity: ") + e.what());
          }
        }
      } else {
        errors.push_back("'nonlinearity' must be a name or a table");
      }
    } else if (key == "dim") {
      dim = val.integer(value, key);
    } else if (key == "box") {
      if (value.is_array())
        box = value.arr();
      else
        errors.push_back("'box' must be an array");
    } else if (key == "cells") {
      if (value.is_array())
        cells = value.arr();
      else
        errors.push_back("'cells' must be an array");
    } else if (key == "T") {
      if (auto n = val.number(value, key)) cfg.T = *n;
    } else if (key == "dt") {
      if (auto n = val.number(value, key)) cfg.dt = *n;
    } else if (key == "store_every") {
      if (auto n = val.integer(value, key)) cfg.store_every = *n;
    } else if (key == "boundary") {
      if (value.is_string() && value.str() == "zero_flux")
        cfg.bc = Boundary::zero_flux;
      else if (value.is_string() && value.str() == "dirichlet_zero")
        cfg.bc = Boundary::dirichlet_zero;
      else
        errors.push_back("'boundary' must be zero_flux or dirichlet_zero");
    } else if (key == "newton_tol") {
      if (auto n = val.number(value, key)) cfg.newton_tol = *n;
    } else if (key == "newton_max_iter") {
      if (auto n = val.integer(value, key)) cfg.newton_max_iter = *n;
    } else if (key == "out") {
      if (value.is_string())
        cfg.out_dir = value.str();
      else
        errors.push_back("'out' must be a string");
    } else if (key == "seed") {
      if (auto n = val.integer(value, key)) cfg.seed = static_cast<unsigned>(*n);
    } else if (key == "mollifier_scaling") {
      if (value.is_string() && value.str() == "mass_normalized")
        cfg.mollifier_scaling = MollifierSpec::Scaling::mass_normalized;
      else if (value.is_string() && value.str() == "single_power")
        cfg.mollifier_scaling = MollifierSpec::Scaling::single_power;
      else
        errors.push_back("'mollifier_scaling' must be mass_normalized or single_power");
    } else if (key == "barrier") {
      if (!value.is_table()) {
        errors.push_back("'barrier' must be a table");
        continue;
      }
      BarrierBlock b;
      for (const auto& [k2, v2] : value.table()) {
        if (k2 == "R" && v2.is_number())
          b.R = v2.num();
        else if (k2 == "T" && v2.is_number())
          b.T = v2.num();
        else if (k2 == "cells" && v2.is_number())
          b.cells = static_cast<int>(v2.num());
        else if (k2 == "dt" && v2.is_number())
          b.dt = v2.num();
        else
          errors.push_back("unknown or malformed key 'barrier." + k2 + "'");
      }
      cfg.barrier = b;
    } else if (key == "theta") {
      if (!value.is_table()) {
        errors.push_back("'theta' must be a table");
        continue;
      }
      ThetaBlock t;
      for (const auto& [k2, v2] : value.table()) {
        if (k2 == "center" && v2.is_array()) {
          const auto& c = v2.arr();
          if (c.size() >= 1) t.center[0] = c[0];
          if (c.size() >= 2) t.center[1] = c[1];
          if (c.size() > 2) errors.push_back("'theta.center' takes at most 2 entries");
        } else if (k2 == "radius" && v2.is_number()) {
          t.radius = v2.num();
        } else if (k2 == "amplitude" && v2.is_number()) {
          t.amplitude = v2.num();
        } else {
          errors.push_back("unknown or malformed key 'theta." + k2 + "'");
        }
      }
      cfg.theta = t;
    } else if (key == "certify") {
      if (!value.is_table()) {
        errors.push_back("'certify' must be a table");
        continue;
      }
      CertifyBlock c;
      for (const auto& [k2, v2] : value.table()) {
        if (k2 == "t0" && v2.is_number())
          c.t0 = v2.num();
        else if (k2 == "eps" && v2.is_number())
          c.eps = v2.num();
        else if (k2 == "eps_trace" && v2.is_number())
          c.eps_trace = v2.num();
        else if (k2 == "eps_shell_early" && v2.is_number())
          c.eps_shell_early = v2.num();
        else if (k2 == "eps_interior_early" && v2.is_number())
          c.eps_interior_early = v2.num();
        else if (k2 == "eps_shell_late" && v2.is_number())
          c.eps_shell_late = v2.num();
        else if (k2 == "eps_interior_late" && v2.is_number())
          c.eps_interior_late = v2.num();
        else if (k2 == "dt_dual" && v2.is_number())
          c.dt_dual = v2.num();
        else if (k2 == "l_min" && v2.is_number())
          c.l_min = v2.num();
        else if (k2 == "m_cap" && v2.is_number())
          c.m_cap = static_cast<int>(v2.num());
        else
          errors.push_back("unknown or malformed key 'certify." + k2 + "'");
      }
      cfg.certify = c;
    } else if (key == "represent") {
      if (!value.is_table()) {
        errors.push_back("'represent' must be a table");
        continue;
      }
      RepresentBlock r;
      for (const auto& [k2, v2] : value.table()) {
        if (k2 == "R" && v2.is_number())
          r.R = v2.num();
        else if (k2 == "t1" && v2.is_number())
          r.t1 = v2.num();
        else if (k2 == "t2" && v2.is_number())
          r.t2 = v2.num();
        else if (k2 == "testfn" && v2.is_number())
          r.testfn = static_cast<int>(v2.num());
        else
          errors.push_back("unknown or malformed key 'represent." + k2 + "'");
      }
      cfg.represent = r;
    } else if (key == "convergence") {
      if (!value.is_table()) {
        errors.push_back("'convergence' must be a table");
        continue;
      }
      ConvergenceBlock c;
      for (const auto& [k2, v2] : value.table()) {
        if (k2 == "kind" && v2.is_string())
          c.kind = v2.str();
        else if (k2 == "levels" && v2.is_number())
          c.levels = static_cast<int>(v2.num());
        else if (k2 == "min_order" && v2.is_number())
          c.min_order = v2.num();
        else
          errors.push_back("unknown or malformed key 'convergence." + k2 + "'");
      }
      if (c.kind != "neumann" && c.kind != "green")
        errors.push_back("'convergence.kind' must be neumann or green");
      cfg.convergence = c;
    } else {
      errors.push_back("unknown key '" + key + "'");
    }
  }

  // grid assembly
  if (dim || box || cells) {
    const int d = dim.value_or(1);
    if (d != 1 && d != 2) {
      errors.push_back("'dim' must be 1 or 2");
    } else if (!box || !cells) {
      errors.push_back("grid requires both 'box' and 'cells'");
    } else {
      const auto& b = *box;
      const auto& cl = *cells;
      try {
        if (d == 1) {
          if (b.size() != 2 || cl.size() != 1)
            errors.push_back("1D grid needs box = [lo, hi] and cells = [n]");
          else
            cfg.grid = Grid::make_1d(b[0], b[1], static_cast<int>(cl[0]));
        } else {
          if (b.size() != 4 || cl.size() != 2)
            errors.push_back("2D grid needs box = [lox, loy, hix, hiy] and cells = [nx, ny]");
          else
            cfg.grid = Grid::make_2d(b[0], b[1], b[2], b[3], static_cast<int>(cl[0]),
                                     static_cast<int>(cl[1]));
        }
      } catch (const std::exception& e) {
        errors.push_back(std::string("invalid grid: ") + e.what());
      }
    }
  }

  // measure assembly
  if (!atoms.empty() || density || gauss_c) {
    SignedMeasure mu;
    mu.dim = cfg.grid ? cfg.grid->dim : (density && density->dim == 2 ? 2 : 1);
    mu.atoms = atoms;
    mu.density = density;
    mu.gauss_c = gauss_c.value_or(0.0);
    cfg.measure = mu;
  }

  // global constraints
  if (cfg.dt <= 0) errors.push_back("'dt' must be positive");
  if (cfg.T <= 0) errors.push_back("'T' must be positive");
  if (cfg.store_every < 1) errors.push_back("'store_every' must be >= 1");
  if (cfg.measure && cfg.measure->gauss_c > 0) {
    const double horizon = 1.0 / (4.0 * cfg.measure->gauss_c);
    if (cfg.T > horizon + 1e-12)
      errors.push_back("horizon violation: T = " + std::to_string(cfg.T) +
                       " exceeds 1/(4*gauss_c) = " + std::to_string(horizon) +
                       " (existence horizon for the declared Gaussian moment)");
  }
  if (cfg.certify) {
    if (cfg.measure && cfg.measure->gauss_c > 0) {
      const double cap = 1.0 / (8.0 * cfg.measure->gauss_c);
      if (cfg.certify->t0 >= std::min(cap, cfg.T))
        errors.push_back("'certify.t0' must be < min(1/(8*gauss_c), T)");
    } else if (cfg.certify->t0 >= cfg.T) {
      errors.push_back("'certify.t0' must be < T");
    }
  }
}

ParseOutcome parse_text_impl(const std::string& text) {
  ParseOutcome out;
  Parser p(text, out.errors);
  ConfigTable top = p.parse_top();
  ExperimentConfig cfg;
  apply_table(top, cfg, out.errors);
  if (out.errors.empty()) out.config = std::move(cfg);
  return out;
}

}  // namespace

ParseOutcome parse_config_text(const std::string& text) { return parse_text_impl(text); }

ParseOutcome parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseOutcome out;
    out.errors.push_back("cannot open config file '" + path + "'");
    return out;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text_impl(ss.str());
}

}  // namespace stefan
