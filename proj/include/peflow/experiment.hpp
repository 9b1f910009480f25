// Experiment driver: config in (JSON), flow + per-sample eigenvalue solves,
// quantity evaluation and checks, CSV series + JSON report out.
#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "peflow/flow.hpp"
#include "peflow/mesh.hpp"
#include "peflow/monotone.hpp"

namespace peflow {

struct InitialU {
  enum class Kind { zero, random, file } kind = Kind::zero;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  std::string path;
};

struct ExperimentConfig {
  nlohmann::json mesh_source;  // {"kind": "icosphere"|"flat_torus"|"genus2"|"file", ...}
  double p = 2.0;
  FlowSpec flow;
  EigenConfig eigen;
  std::vector<std::string> quantities;  // empty = "auto" (branch table on sign chi, p)
  InitialU initial_u;
  std::string output_dir = ".";
  std::string csv_name = "series.csv";
  std::string report_name = "report.json";
  nlohmann::json raw;  // parsed source, echoed into the report
};

// Parses and validates a config document. Unknown mesh kinds, p <= 1, or an
// unresolvable mesh throw BadParams. The PEFLOW_OUTPUT_DIR environment
// variable, when set, overrides output_dir (the only env override).
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::string& path);

struct ExperimentResult {
  bool ok = false;
  std::string csv_path;
  std::string report_path;
  nlohmann::json report;
};

// Runs the configured flow with per-sample eigen solves; evaluates the
// selected quantities, the predicted-rate vs finite-difference comparison,
// and the curvature-bound sandwiches; writes the CSV (columns t, lambda,
// converged, r, R_min, R_max, area, then one per quantity; floats at 17
// significant digits, so identical configs produce byte-identical files)
// and the JSON report (checker outcomes, BoundParams with the estimated C,
// seeds, tolerances, config hash). On error a partial report with a failure
// marker is still flushed.
ExperimentResult run_experiment(const ExperimentConfig& config);

// FNV-1a 64 over the canonical dump of the config document.
std::string config_hash(const nlohmann::json& doc);

// Resolves the mesh named by a config mesh_source block.
TriangleMesh resolve_mesh(const nlohmann::json& mesh_source);

}  // namespace peflow
