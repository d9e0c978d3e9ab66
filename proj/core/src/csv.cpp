#include "stefan/csv.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace stefan {

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_field_csv(const Field& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const Grid& g = f.grid;
  if (g.dim == 1)
    out << "dim,origin,spacing,cells,time_tag\n"
        << 1 << ',' << format_double(g.origin[0]) << ',' << format_double(g.h) << ','
        << g.cells[0] << ',' << format_double(f.time_tag) << "\n";
  else
    out << "dim,origin_x,origin_y,spacing,cells_x,cells_y,time_tag\n"
        << 2 << ',' << format_double(g.origin[0]) << ',' << format_double(g.origin[1]) << ','
        << format_double(g.h) << ',' << g.cells[0] << ',' << g.cells[1] << ','
        << format_double(f.time_tag) << "\n";
  for (double v : f.v) out << format_double(v) << "\n";
}

Field read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header row");
  const auto tok = split_csv_line(line);
  if (tok.empty()) throw std::runtime_error(path + ": malformed header row");
  const int dim = std::stoi(tok[0]);
  Grid g;
  double time_tag = 0.0;
  if (dim == 1) {
    if (tok.size() != 5) throw std::runtime_error(path + ": 1D header needs 5 columns");
    g = Grid(1, {std::stod(tok[1]), 0.0}, std::stod(tok[2]), {std::stoi(tok[3]), 1});
    time_tag = std::stod(tok[4]);
  } else if (dim == 2) {
    if (tok.size() != 7) throw std::runtime_error(path + ": 2D header needs 7 columns");
    g = Grid(2, {std::stod(tok[1]), std::stod(tok[2])}, std::stod(tok[3]),
             {std::stoi(tok[4]), std::stoi(tok[5])});
    time_tag = std::stod(tok[6]);
  } else {
    throw std::runtime_error(path + ": dim must be 1 or 2");
  }
  Field f(g, 0.0, time_tag);
  for (int i = 0; i < g.size(); ++i) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated value section");
    f[i] = std::stod(line);
  }
  return f;
}

void write_run_dir(const SpaceTimeField& history, const RunManifest& manifest,
                   const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  RunManifest m = manifest;
  m.slice_files.clear();
  m.slice_times.clear();
  for (int k = 0; k < history.steps(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "u_%06d.csv", k);
    write_field_csv(history.field_at(k), (fs::path(dir) / name).string());
    m.slice_files.push_back(name);
    m.slice_times.push_back(history.time(k));
  }

  nlohmann::json j;
  j["scheme"] = m.scheme;
  j["dt"] = m.dt;
  j["T"] = m.T;
  j["store_every"] = m.store_every;
  j["stored_dt"] = history.dt;
  j["newton_tol"] = m.newton_tol;
  j["newton_max_iter"] = m.newton_max_iter;
  j["boundary"] = m.boundary;
  j["gauss_c"] = m.gauss_c;
  j["nonlinearity"] = {{"slope_at_infinity", m.slope_at_infinity},
                       {"offset_bound", m.offset_bound}};
  auto& bp = j["nonlinearity"]["breakpoints"];
  for (const auto& p : m.breakpoints) bp.push_back({p.first, p.second});
  j["config_hash"] = m.config_hash;
  j["wall_time_s"] = m.wall_time_s;
  j["total_steps"] = m.total_steps;
  j["newton_iter_total"] = m.newton_iter_total;
  j["fallback_steps"] = m.fallback_steps;
  j["mass_ledger"] = m.mass_ledger;
  j["slices"] = nlohmann::json::array();
  for (size_t i = 0; i < m.slice_files.size(); ++i)
    j["slices"].push_back({{"file", m.slice_files[i]}, {"time", m.slice_times[i]}});

  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << j.dump(2) << "\n";
}

LoadedRun read_run_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw std::runtime_error("missing manifest.json in " + dir);
  nlohmann::json j;
  in >> j;

  LoadedRun run;
  run.manifest.scheme = j.value("scheme", "");
  run.manifest.dt = j.value("dt", 0.0);
  run.manifest.T = j.value("T", 0.0);
  run.manifest.store_every = j.value("store_every", 1);
  run.manifest.newton_tol = j.value("newton_tol", 0.0);
  run.manifest.newton_max_iter = j.value("newton_max_iter", 0);
  run.manifest.boundary = j.value("boundary", "");
  run.manifest.gauss_c = j.value("gauss_c", 0.0);
  run.manifest.config_hash = j.value("config_hash", "");
  run.manifest.total_steps = j.value("total_steps", 0);
  if (j.contains("nonlinearity")) {
    run.manifest.slope_at_infinity = j["nonlinearity"].value("slope_at_infinity", 1.0);
    run.manifest.offset_bound = j["nonlinearity"].value("offset_bound", 1.0);
    if (j["nonlinearity"].contains("breakpoints"))
      for (const auto& p : j["nonlinearity"]["breakpoints"])
        run.manifest.breakpoints.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  if (j.contains("mass_ledger"))
    run.manifest.mass_ledger = j["mass_ledger"].get<std::vector<double>>();

  if (!j.contains("slices") || j["slices"].empty())
    throw std::runtime_error("manifest in " + dir + " lists no slices");

  std::vector<Field> fields;
  for (const auto& s : j["slices"]) {
    const std::string file = s["file"].get<std::string>();
    fields.push_back(read_field_csv((fs::path(dir) / file).string()));
    run.manifest.slice_files.push_back(file);
    run.manifest.slice_times.push_back(s["time"].get<double>());
  }
  const double t0 = run.manifest.slice_times.front();
  const double dt = fields.size() > 1 ? run.manifest.slice_times[1] - t0 : 1.0;
  run.history = SpaceTimeField(fields.front().grid, t0, dt);
  for (auto& f : fields) {
    if (!(f.grid == fields.front().grid))
      throw std::runtime_error("inconsistent slice grids in " + dir);
    run.history.push(std::move(f.v));
  }
  return run;
}

void write_report_csv(const CertificateReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "name,computed,bound,slack,budget,pass\n";
  for (const auto& row : rep.terms)
    out << row.name << ',' << format_double(row.computed) << ',' << format_double(row.bound)
        << ',' << format_double(row.slack) << ',' << format_double(row.budget) << ','
        << (row.pass ? 1 : 0) << "\n";
  out << "certified," << format_double(std::abs(rep.direct_pairing)) << ','
      << format_double(rep.certified_bound) << ",0,0," << (rep.pass ? 1 : 0) << "\n";
}

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace stefan
