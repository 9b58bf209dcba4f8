#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "umap/dataset.hpp"
#include "umap/mapper.hpp"
#include "umap/planner.hpp"
#include "umap/scenario.hpp"

namespace umap {

namespace fs = std::filesystem;

/// "builtin:glass_office", "builtin:glass_office_no_table",
/// "builtin:circular_room", or a scenario JSON path.
Scenario resolve_scenario(const std::string& ref);

struct SimulateOptions {
  std::string scenario = "builtin:glass_office";
  int n_poses = 200;
  std::uint64_t seed = 0;
  fs::path out;
  /// Non-empty: poses follow these waypoints at `spacing` instead of being sampled.
  std::vector<Vec2> waypoints;
  double spacing = 0.1;
  double clearance = 0.3;
  std::string stream = "simulate";
};

Dataset cmd_simulate(const SimulateOptions& options);

/// Estimator named by a spec string: "raw", "oracle", "head:<artifact>",
/// "dropout:<artifact>". Heads take their distances from the oracle.
struct NamedEstimator {
  std::string name;
  Estimator estimate;
};

struct EstimatorContext {
  ErrorModel oracle;
  double max_range = 15.0;
  std::uint64_t seed = 0;
  double raw_sigma = 0.05;
  Spread spread = Spread::StdDev;
};

NamedEstimator make_estimator(const std::string& spec, const EstimatorContext& context);

struct TrainOptions {
  fs::path data;
  /// laplace, gaussian or dropout.
  std::string kind = "laplace";
  TrainConfig train;
  int window = 4;
  int dropout_samples = 50;
  double drop_p = 0.5;
  ErrorModel oracle;
  fs::path out;
  /// Optional per-epoch loss log (epoch,loss).
  fs::path loss_csv;
  bool verbose = false;
};

/// Trains and writes the artifact; returns its JSON.
nlohmann::json cmd_train(const TrainOptions& options);

struct BuildMapOptions {
  std::string scenario = "builtin:glass_office";
  fs::path data;
  std::string estimator = "oracle";
  /// Empty: derive the default spline.
  fs::path spline;
  double alpha = 0.01;
  std::uint64_t seed = 0;
  ErrorModel oracle;
  /// Writes <out>.pgm, <out>.yaml, <out>.csv.
  fs::path out;
};

ProbabilityMap cmd_build_map(const BuildMapOptions& options);

/// Writes the PGM, YAML and CSV exports of a map under `prefix`.
void export_map(const ProbabilityMap& map, const fs::path& prefix, std::uint64_t seed);

struct LoglikRow {
  std::string estimator;
  std::string model;
  std::size_t rays = 0;
  double average = 0.0;
};

struct EvalOptions {
  fs::path data;
  std::vector<std::string> estimators;
  EstimatorContext context;
  fs::path out;
};

std::vector<LoglikRow> evaluate_loglik(const Dataset& data, const std::vector<NamedEstimator>& estimators);
std::vector<LoglikRow> cmd_eval_loglik(const EvalOptions& options);
std::string loglik_csv(const std::vector<LoglikRow>& rows);
std::string loglik_table(const std::vector<LoglikRow>& rows);

struct PlanOptions {
  std::string scenario = "builtin:glass_office";
  fs::path map;
  Vec2 start;
  Vec2 goal;
  CostmapConfig costmap;
  /// Optional outputs: path overlay PGM and path CSV.
  fs::path overlay;
  fs::path path_csv;
};

PathResult cmd_plan(const PlanOptions& options);

struct NavOptions {
  std::string scenario = "builtin:glass_office_no_table";
  /// name -> probability CSV
  std::vector<std::pair<std::string, fs::path>> maps;
  NavConfig nav;
  fs::path out;
};

NavReport cmd_nav_experiment(const NavOptions& options);

/// Reproducible end-to-end run description.
struct Manifest {
  std::string scenario = "builtin:glass_office_no_table";
  std::uint64_t seed = 0;
  double alpha = 0.01;
  fs::path out = "run";
  /// Optional pre-trained Laplace head; trained when empty.
  fs::path estimator;
  /// Optional spline artifact; derived when empty.
  fs::path spline;
  std::vector<std::string> variants{"slam", "dropout", "gaussian", "laplace"};
  int train_poses = 100;
  int eval_poses = 200;
  TrainConfig train{300, 3e-3, 16, 0};
  TrainConfig dropout_train{300, 3e-3, 16, 0};
  int nav_goals = 15;
  int nav_trajectories = 400;
};

inline constexpr int kManifestSchema = 1;

nlohmann::json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);
Manifest load_manifest(const fs::path& path);

/// Runs every stage into m.out and returns the resolved manifest with
/// per-stage input checksums and output checksums. A failing stage is
/// rethrown with the stage name prefixed.
nlohmann::json cmd_pipeline(const Manifest& manifest, bool verbose = false);

/// Exit code for an exception: 2 config, 3 data, 4 numeric, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace umap
