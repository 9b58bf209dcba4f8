#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "umap/commands.hpp"
#include "umap/map_io.hpp"

using namespace umap;

namespace {

Vec2 parse_point(const std::string& s) {
  Vec2 p;
  char comma = 0;
  std::istringstream in(s);
  if (!(in >> p.x >> comma >> p.y) || comma != ',') throw ConfigError("expected x,y but got '" + s + "'");
  return p;
}

std::vector<Vec2> parse_waypoints(const std::string& s) {
  std::vector<Vec2> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (!item.empty()) out.push_back(parse_point(item));
  }
  return out;
}

Spread parse_spread(const std::string& s) {
  if (s == "std") return Spread::StdDev;
  if (s == "variance") return Spread::Variance;
  throw ConfigError("spread must be std or variance");
}

void add_oracle_options(CLI::App* cmd, ErrorModel& m, std::string& kind) {
  cmd->add_option("--oracle-kind", kind, "Residual family of the oracle distance estimator")->default_val("laplace");
  cmd->add_option("--visible-scale", m.visible_scale, "Oracle residual scale on visible rays (m)")->default_val(0.02);
  cmd->add_option("--hidden-scale", m.hidden_scale, "Oracle residual scale on hidden rays (m)")->default_val(0.05);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty occupancy mapping with laser-invisible obstacles"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  bool verbose = false;
  app.add_option("--seed", seed, "Root random seed")->default_val(0);
  app.add_flag("-v,--verbose", verbose, "Progress on stderr");

  // simulate
  SimulateOptions sim;
  std::string waypoints;
  auto* simulate = app.add_subcommand("simulate", "Sample poses and capture scans into a dataset directory");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON or builtin:<name>")->default_val(sim.scenario);
  simulate->add_option("--poses", sim.n_poses, "Number of sampled poses")->default_val(sim.n_poses);
  simulate->add_option("--waypoints", waypoints, "Trajectory 'x,y;x,y;...' instead of sampling");
  simulate->add_option("--spacing", sim.spacing, "Pose spacing along waypoints (m)")->default_val(sim.spacing);
  simulate->add_option("--clearance", sim.clearance, "Minimum obstacle clearance of sampled poses (m)")
      ->default_val(sim.clearance);
  simulate->add_option("--out", sim.out, "Output directory")->required();
  std::string write_scenario;
  simulate->add_option("--write-scenario", write_scenario, "Also save the resolved scenario JSON here");

  // train-uncertainty
  TrainOptions train;
  std::string train_oracle_kind;
  auto* train_cmd = app.add_subcommand("train-uncertainty", "Train an uncertainty head or the MC-dropout baseline");
  train_cmd->add_option("--data", train.data, "Dataset directory")->required();
  train_cmd->add_option("--kind", train.kind, "laplace, gaussian or dropout")->default_val("laplace");
  train_cmd->add_option("--epochs", train.train.epochs)->default_val(2000);
  train_cmd->add_option("--lr", train.train.learning_rate)->default_val(1e-4);
  train_cmd->add_option("--batch", train.train.batch, "Scans per mini-batch")->default_val(32);
  train_cmd->add_option("--loss-csv", train.loss_csv, "Per-epoch loss log");
  train_cmd->add_option("--window", train.window, "Half-width of the ray window")->default_val(4);
  train_cmd->add_option("--samples", train.dropout_samples, "MC-dropout passes")->default_val(50);
  train_cmd->add_option("--drop-p", train.drop_p, "Dropout probability")->default_val(0.5);
  train_cmd->add_option("--out", train.out, "Artifact JSON")->required();
  add_oracle_options(train_cmd, train.oracle, train_oracle_kind);

  // derive-spline
  int segments = 16;
  int fit_samples = 4001;
  std::string spline_out;
  auto* spline_cmd = app.add_subcommand("derive-spline", "Fit the truncated spline density");
  spline_cmd->add_option("--segments", segments)->default_val(16);
  spline_cmd->add_option("--samples", fit_samples)->default_val(4001);
  spline_cmd->add_option("--out", spline_out, "Spline JSON")->required();

  // build-map
  BuildMapOptions bm;
  std::string bm_oracle_kind;
  auto* build = app.add_subcommand("build-map", "Integrate a dataset into an uncertainty map");
  build->add_option("--scenario", bm.scenario)->default_val(bm.scenario);
  build->add_option("--data", bm.data, "Dataset directory")->required();
  build->add_option("--estimator", bm.estimator, "raw, oracle, head:<file> or dropout:<file>")->default_val("oracle");
  build->add_option("--spline", bm.spline, "Spline JSON (derived when omitted)");
  build->add_option("--alpha", bm.alpha, "Correlation factor")->default_val(0.01);
  build->add_option("--out", bm.out, "Output prefix for .pgm/.yaml/.csv")->required();
  add_oracle_options(build, bm.oracle, bm_oracle_kind);

  // eval-loglik
  EvalOptions ev;
  std::string ev_oracle_kind;
  std::string ev_spread = "std";
  auto* eval = app.add_subcommand("eval-loglik", "Average per-ray log-likelihood per estimator");
  eval->add_option("--data", ev.data, "Dataset directory")->required();
  eval->add_option("--estimator", ev.estimators, "Estimator spec, repeatable")->required();
  eval->add_option("--spread", ev_spread, "MC-dropout spread: std or variance")->default_val("std");
  eval->add_option("--out", ev.out, "Report CSV");
  add_oracle_options(eval, ev.context.oracle, ev_oracle_kind);

  // plan
  PlanOptions pl;
  std::string start, goal;
  auto* plan_cmd = app.add_subcommand("plan", "Plan one path on a probability map");
  plan_cmd->add_option("--scenario", pl.scenario)->default_val(pl.scenario);
  plan_cmd->add_option("--map", pl.map, "Probability CSV")->required();
  plan_cmd->add_option("--start", start, "x,y")->required();
  plan_cmd->add_option("--goal", goal, "x,y")->required();
  plan_cmd->add_option("--lambda", pl.costmap.lambda)->default_val(5.0);
  plan_cmd->add_option("--lethal", pl.costmap.lethal_threshold)->default_val(0.65);
  plan_cmd->add_option("--robot-radius", pl.costmap.robot_radius)->default_val(0.3);
  plan_cmd->add_option("--inflation-radius", pl.costmap.inflation_radius)->default_val(0.5);
  plan_cmd->add_option("--overlay", pl.overlay, "PGM with the path drawn on the map");
  plan_cmd->add_option("--out", pl.path_csv, "Path CSV");

  // nav-experiment
  NavOptions nav;
  std::vector<std::string> map_args;
  auto* nav_cmd = app.add_subcommand("nav-experiment", "Collision counts over seeded goal pairs");
  nav_cmd->add_option("--scenario", nav.scenario)->default_val(nav.scenario);
  nav_cmd->add_option("--map", map_args, "name=probability.csv, repeatable")->required();
  nav_cmd->add_option("--goals", nav.nav.n_goals)->default_val(15);
  nav_cmd->add_option("--trajectories", nav.nav.n_trajectories)->default_val(400);
  nav_cmd->add_option("--lambda", nav.nav.costmap.lambda)->default_val(5.0);
  nav_cmd->add_option("--lethal", nav.nav.costmap.lethal_threshold)->default_val(0.65);
  nav_cmd->add_option("--out", nav.out, "Output directory")->required();

  // pipeline
  std::string manifest_path;
  Manifest mf;
  std::string out_dir;
  std::vector<std::string> variants;
  double alpha = 0.01;
  auto* pipe = app.add_subcommand("pipeline", "simulate, train, derive-spline, build-map, eval-loglik, nav-experiment");
  pipe->add_option("--manifest", manifest_path, "Manifest JSON; flags given on the command line override it");
  pipe->add_option("--out", out_dir, "Output directory");
  pipe->add_option("--scenario", mf.scenario);
  pipe->add_option("--alpha", alpha, "Correlation factor")->default_val(0.01);
  pipe->add_option("--variants", variants, "Subset of slam dropout gaussian laplace oracle");
  pipe->add_option("--estimator", mf.estimator, "Pre-trained Laplace head");
  pipe->add_option("--spline", mf.spline, "Spline artifact");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      sim.seed = seed;
      sim.waypoints = parse_waypoints(waypoints);
      const Dataset d = cmd_simulate(sim);
      if (!write_scenario.empty()) save_scenario(resolve_scenario(sim.scenario), write_scenario);
      std::cout << "wrote " << d.scans.size() << " scans to " << sim.out.string() << '\n';
    } else if (*train_cmd) {
      train.train.seed = seed;
      train.oracle.kind = model_kind_from_string(train_oracle_kind);
      train.verbose = verbose;
      const auto art = cmd_train(train);
      std::cout << "wrote " << train.out.string();
      if (art.contains("final_loss")) std::cout << " (final loss " << art["final_loss"].get<double>() << ")";
      std::cout << '\n';
    } else if (*spline_cmd) {
      const SplineModel s = derive_spline(segments, fit_samples);
      save_spline(s, spline_out);
      std::printf("L1 to Laplace(0,1): %.6f, clamped coefficients: %d\n", s.fit_info().l1_error, s.fit_info().clamped);
    } else if (*build) {
      bm.seed = seed;
      bm.oracle.kind = model_kind_from_string(bm_oracle_kind);
      cmd_build_map(bm);
      std::cout << "wrote " << bm.out.string() << ".{pgm,yaml,csv}\n";
    } else if (*eval) {
      ev.context.seed = seed;
      ev.context.oracle.kind = model_kind_from_string(ev_oracle_kind);
      ev.context.spread = parse_spread(ev_spread);
      std::cout << loglik_table(cmd_eval_loglik(ev));
    } else if (*plan_cmd) {
      pl.start = parse_point(start);
      pl.goal = parse_point(goal);
      const PathResult path = cmd_plan(pl);
      if (path.status == PlanStatus::Found) {
        std::printf("found: %zu cells, cost %.6f\n", path.cells.size(), path.cost);
      } else {
        std::printf("no_path\n");
      }
    } else if (*nav_cmd) {
      nav.nav.seed = seed;
      for (const auto& arg : map_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos) throw ConfigError("--map expects name=file, got '" + arg + "'");
        nav.maps.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
      }
      std::cout << nav_report_table(cmd_nav_experiment(nav));
    } else if (*pipe) {
      Manifest m = manifest_path.empty() ? Manifest{} : load_manifest(manifest_path);
      if (manifest_path.empty() || app.count("--seed")) m.seed = seed;
      if (pipe->count("--alpha") || manifest_path.empty()) m.alpha = alpha;
      if (!out_dir.empty()) m.out = out_dir;
      if (pipe->count("--scenario")) m.scenario = mf.scenario;
      if (!variants.empty()) m.variants = variants;
      if (!mf.estimator.empty()) m.estimator = mf.estimator;
      if (!mf.spline.empty()) m.spline = mf.spline;
      m = manifest_from_json(manifest_to_json(m));
      cmd_pipeline(m, verbose);
      std::cout << "pipeline outputs in " << m.out.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
