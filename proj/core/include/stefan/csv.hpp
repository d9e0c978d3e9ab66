#pragma once

#include <string>
#include <vector>

#include "stefan/duality.hpp"
#include "stefan/grid.hpp"

namespace stefan {

/// Field CSV schema: header line
///   dim,origin...,spacing,cells...,time_tag
/// (origin and cells expand to one column per axis), then one value per line
/// in row-major order (x fastest).
void write_field_csv(const Field& f, const std::string& path);
Field read_field_csv(const std::string& path);

/// Forward-run directory: u_<k>.csv slices plus manifest.json listing them.
struct RunManifest {
  std::string scheme = "implicit_euler_enthalpy";
  double dt = 0.0;
  double T = 0.0;
  int store_every = 1;
  double newton_tol = 0.0;
  int newton_max_iter = 0;
  std::string boundary;
  double gauss_c = 0.0;
  double slope_at_infinity = 1.0;
  double offset_bound = 1.0;
  std::vector<std::pair<double, double>> breakpoints;
  std::string config_hash;
  double wall_time_s = 0.0;
  int total_steps = 0;
  int newton_iter_total = 0;
  int fallback_steps = 0;
  std::vector<double> mass_ledger;
  std::vector<std::string> slice_files;
  std::vector<double> slice_times;
};

void write_run_dir(const SpaceTimeField& history, const RunManifest& manifest,
                   const std::string& dir);

struct LoadedRun {
  SpaceTimeField history;
  RunManifest manifest;
};

LoadedRun read_run_dir(const std::string& dir);

/// Certificate report CSV: one row per term
///   name,computed,bound,slack,budget,pass
/// plus a final `certified` row (computed = |direct pairing|, bound = sum).
void write_report_csv(const CertificateReport& rep, const std::string& path);

/// FNV-1a hash of a byte string, hex-encoded (config fingerprinting).
std::string fnv1a_hex(const std::string& bytes);

}  // namespace stefan
