#include "umap/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "umap/map_io.hpp"

namespace umap {

using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_dir(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

GridWorld world_of(const std::string& ref) { return build_world(resolve_scenario(ref).world); }

// Runs one pipeline stage, prefixing any failure with the stage name while
// keeping the error category.
template <class F>
auto run_stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError("stage " + name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage " + name + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error("stage " + name + ": " + e.what());
  }
}

std::string relative_to(const fs::path& file, const fs::path& base) {
  return file.lexically_relative(base).generic_string();
}

}  // namespace

Scenario resolve_scenario(const std::string& ref) {
  if (ref == "builtin:glass_office") return glass_office_scenario(true);
  if (ref == "builtin:glass_office_no_table") return glass_office_scenario(false);
  if (ref == "builtin:circular_room") return circular_room_scenario();
  if (ref.starts_with("builtin:")) throw ConfigError("unknown builtin scenario '" + ref + "'");
  return load_scenario(ref);
}

Dataset cmd_simulate(const SimulateOptions& o) {
  if (o.n_poses < 0) throw ConfigError("simulate: pose count must be nonnegative");
  const Scenario sc = resolve_scenario(o.scenario);
  const GridWorld world = build_world(sc.world);
  std::vector<Pose2D> poses;
  if (!o.waypoints.empty()) {
    if (!(o.spacing > 0.0)) throw ConfigError("simulate: waypoint spacing must be positive");
    poses = interpolate_waypoints(o.waypoints, o.spacing);
  } else {
    Rng rng = make_rng(o.seed, o.stream + "-poses");
    poses = sample_free_poses(world, static_cast<std::size_t>(o.n_poses), o.clearance, rng);
  }
  Dataset d = simulate_dataset(world, poses, sc.scan_noise_sigma, o.seed, o.stream);
  if (!o.out.empty()) write_dataset(d, o.out);
  return d;
}

NamedEstimator make_estimator(const std::string& spec, const EstimatorContext& c) {
  const Estimator oracle = oracle_estimator(c.oracle, c.max_range, derive_seed(c.seed, "oracle"));
  if (spec == "raw" || spec == "slam") return {"slam", raw_scan_estimator(c.raw_sigma)};
  if (spec == "oracle") return {"oracle", oracle};
  if (spec.starts_with("head:")) {
    UncertaintyHead head = head_from_json(load_json(spec.substr(5)));
    const std::string name = to_string(head.kind());
    return {name, head_estimator(oracle, std::move(head))};
  }
  if (spec.starts_with("dropout:")) {
    DropoutNet net = dropout_from_json(load_json(spec.substr(8)));
    return {"dropout", dropout_estimator(std::move(net), derive_seed(c.seed, "dropout"), c.spread)};
  }
  throw ConfigError("unknown estimator '" + spec + "' (raw, oracle, head:<file>, dropout:<file>)");
}

json cmd_train(const TrainOptions& o) {
  const Dataset data = read_dataset(o.data);
  if (data.scans.empty()) throw DataError("train: dataset is empty");
  const bool circular = data.fov >= 2.0 * std::numbers::pi - 1e-12;
  const Estimator oracle = oracle_estimator(o.oracle, data.max_range, derive_seed(o.train.seed, "oracle-train"));
  const auto samples = training_samples(data, oracle);
  const int report_every = std::max(1, o.train.epochs / 10);
  std::ostringstream losses;
  losses << "epoch,loss\n";
  auto progress = [&](int epoch, double loss) {
    char line[64];
    std::snprintf(line, sizeof line, "%d,%.17g\n", epoch, loss);
    losses << line;
    if (o.verbose && (epoch % report_every == 0 || epoch + 1 == o.train.epochs)) {
      std::cerr << "epoch " << epoch << " loss " << loss << '\n';
    }
  };

  json artifact;
  if (o.kind == "dropout") {
    DropoutConfig dc;
    dc.window = o.window;
    dc.samples = o.dropout_samples;
    dc.drop_p = o.drop_p;
    dc.max_range = data.max_range;
    dc.circular = circular;
    artifact = dropout_to_json(train_dropout_net(samples, dc, o.train, progress));
  } else {
    HeadConfig hc;
    hc.kind = model_kind_from_string(o.kind);
    hc.window = o.window;
    hc.max_range = data.max_range;
    hc.circular = circular;
    const TrainResult r = train_uncertainty_head(samples, hc, o.train, progress);
    artifact = head_to_json(r.head);
    artifact["final_loss"] = r.epoch_loss.empty() ? 0.0 : r.epoch_loss.back();
  }
  artifact["seed"] = o.train.seed;
  artifact["training"] = {{"epochs", o.train.epochs},
                          {"learning_rate", o.train.learning_rate},
                          {"batch", o.train.batch},
                          {"scans", data.scans.size()}};
  if (!o.out.empty()) {
    ensure_dir(o.out.parent_path());
    save_json(artifact, o.out);
  }
  if (!o.loss_csv.empty()) {
    write_text(o.loss_csv, losses.str());
    write_sidecar(o.loss_csv, o.train.seed);
  }
  return artifact;
}

void export_map(const ProbabilityMap& map, const fs::path& prefix, std::uint64_t seed) {
  ensure_dir(prefix.parent_path());
  const fs::path pgm = prefix.string() + ".pgm";
  const fs::path csv = prefix.string() + ".csv";
  write_pgm(map, pgm);
  write_map_yaml(map, prefix.string() + ".yaml", pgm.filename().string(), seed);
  write_probability_csv(map, csv);
  write_sidecar(pgm, seed);
  write_sidecar(csv, seed);
}

ProbabilityMap cmd_build_map(const BuildMapOptions& o) {
  const GridWorld world = world_of(o.scenario);
  const Dataset data = read_dataset(o.data);
  const SplineModel spline = o.spline.empty() ? derive_spline() : load_spline(o.spline);
  EstimatorContext ctx;
  ctx.oracle = o.oracle;
  ctx.max_range = data.max_range;
  ctx.seed = o.seed;
  const NamedEstimator est = make_estimator(o.estimator, ctx);
  MapperConfig mc;
  mc.alpha = o.alpha;
  mc.max_range = data.max_range;
  mc.fov = data.fov;
  ProbabilityMap map = build_uncertainty_map(data.scans, est.estimate, spline, world.geometry(), mc);
  if (!o.out.empty()) export_map(map, o.out, o.seed);
  return map;
}

std::vector<LoglikRow> evaluate_loglik(const Dataset& data, const std::vector<NamedEstimator>& estimators) {
  if (data.scans.empty()) throw DataError("eval-loglik: dataset is empty");
  std::vector<LoglikRow> rows;
  for (const auto& e : estimators) {
    std::vector<double> y_hat, y_true, u_hat;
    ModelKind kind = ModelKind::Laplace;
    for (std::size_t i = 0; i < data.scans.size(); ++i) {
      const auto& s = data.scans[i];
      const EstimatorOutput out = e.estimate(s, i);
      if (out.y_hat.size() != s.y_true.size() || out.u_hat.values.size() != s.y_true.size()) {
        throw DataError("eval-loglik: estimator '" + e.name + "' returned the wrong ray count");
      }
      kind = out.u_hat.kind;
      y_hat.insert(y_hat.end(), out.y_hat.begin(), out.y_hat.end());
      y_true.insert(y_true.end(), s.y_true.begin(), s.y_true.end());
      u_hat.insert(u_hat.end(), out.u_hat.values.begin(), out.u_hat.values.end());
    }
    rows.push_back({e.name, to_string(kind), y_hat.size(), average_loglik(kind, y_hat, y_true, u_hat)});
  }
  return rows;
}

std::vector<LoglikRow> cmd_eval_loglik(const EvalOptions& o) {
  const Dataset data = read_dataset(o.data);
  EstimatorContext ctx = o.context;
  ctx.max_range = data.max_range;
  std::vector<NamedEstimator> estimators;
  for (const auto& spec : o.estimators) estimators.push_back(make_estimator(spec, ctx));
  if (estimators.empty()) throw ConfigError("eval-loglik: no estimators given");
  auto rows = evaluate_loglik(data, estimators);
  if (!o.out.empty()) {
    write_text(o.out, loglik_csv(rows));
    write_sidecar(o.out, ctx.seed);
  }
  return rows;
}

std::string loglik_csv(const std::vector<LoglikRow>& rows) {
  std::ostringstream out;
  out << "estimator,model,rays,average_loglik\n";
  char v[32];
  for (const auto& r : rows) {
    std::snprintf(v, sizeof v, "%.17g", r.average);
    out << r.estimator << ',' << r.model << ',' << r.rays << ',' << v << '\n';
  }
  return out.str();
}

std::string loglik_table(const std::vector<LoglikRow>& rows) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %-9s %8s %14s\n", "estimator", "model", "rays", "avg loglik");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-10s %-9s %8zu %14.4f\n", r.estimator.c_str(), r.model.c_str(), r.rays,
                  r.average);
    out << line;
  }
  return out.str();
}

PathResult cmd_plan(const PlanOptions& o) {
  const GridWorld world = world_of(o.scenario);
  const ProbabilityMap map = read_probability_csv(o.map, world.geometry());
  const Costmap cm = make_costmap(map, o.costmap);
  PathResult path = plan(cm, o.start, o.goal);
  if (!o.overlay.empty()) {
    ensure_dir(o.overlay.parent_path());
    PgmOptions opts;
    opts.overlay = path.cells;
    write_pgm(map, o.overlay, opts);
    write_sidecar(o.overlay, 0);
  }
  if (!o.path_csv.empty()) {
    std::ostringstream out;
    out << "index,ix,iy,x,y\n";
    char line[128];
    for (std::size_t i = 0; i < path.cells.size(); ++i) {
      std::snprintf(line, sizeof line, "%zu,%d,%d,%.17g,%.17g\n", i, path.cells[i].ix, path.cells[i].iy,
                    path.waypoints[i].x, path.waypoints[i].y);
      out << line;
    }
    write_text(o.path_csv, out.str());
    write_sidecar(o.path_csv, 0, {{"status", path.status == PlanStatus::Found ? "found" : "no_path"}});
  }
  return path;
}

NavReport cmd_nav_experiment(const NavOptions& o) {
  const GridWorld world = world_of(o.scenario);
  std::vector<MapVariant> variants;
  for (const auto& [name, file] : o.maps) variants.push_back({name, read_probability_csv(file, world.geometry())});
  if (variants.empty()) throw ConfigError("nav-experiment: no maps given");
  NavReport report = nav_experiment(world, variants, o.nav);
  if (!o.out.empty()) {
    ensure_dir(o.out);
    write_text(o.out / "nav_report.csv", nav_report_csv(report));
    write_text(o.out / "nav_details.csv", nav_details_csv(report));
    write_text(o.out / "nav_report.txt", nav_report_table(report));
    write_sidecar(o.out / "nav_report.csv", o.nav.seed, {{"goals", o.nav.n_goals}, {"trajectories", o.nav.n_trajectories}});
    write_sidecar(o.out / "nav_details.csv", o.nav.seed);
  }
  return report;
}

json manifest_to_json(const Manifest& m) {
  auto train = [](const TrainConfig& t) {
    return json{{"epochs", t.epochs}, {"learning_rate", t.learning_rate}, {"batch", t.batch}};
  };
  return {{"schema", kManifestSchema},
          {"scenario", m.scenario},
          {"seed", m.seed},
          {"alpha", m.alpha},
          {"out", m.out.generic_string()},
          {"estimator", m.estimator.generic_string()},
          {"spline", m.spline.generic_string()},
          {"variants", m.variants},
          {"train_poses", m.train_poses},
          {"eval_poses", m.eval_poses},
          {"train", train(m.train)},
          {"dropout_train", train(m.dropout_train)},
          {"nav", {{"goals", m.nav_goals}, {"trajectories", m.nav_trajectories}}}};
}

Manifest manifest_from_json(const json& j) {
  try {
    if (j.value("schema", kManifestSchema) != kManifestSchema) throw ConfigError("manifest: unsupported schema");
    Manifest m;
    m.scenario = j.value("scenario", m.scenario);
    m.seed = j.value("seed", m.seed);
    m.alpha = j.value("alpha", m.alpha);
    m.out = j.value("out", m.out.generic_string());
    m.estimator = j.value("estimator", std::string());
    m.spline = j.value("spline", std::string());
    if (j.contains("variants")) m.variants = j.at("variants").get<std::vector<std::string>>();
    m.train_poses = j.value("train_poses", m.train_poses);
    m.eval_poses = j.value("eval_poses", m.eval_poses);
    auto train = [&](const char* key, TrainConfig& t) {
      if (!j.contains(key)) return;
      const auto& s = j.at(key);
      t.epochs = s.value("epochs", t.epochs);
      t.learning_rate = s.value("learning_rate", t.learning_rate);
      t.batch = s.value("batch", t.batch);
    };
    train("train", m.train);
    train("dropout_train", m.dropout_train);
    if (j.contains("nav")) {
      m.nav_goals = j.at("nav").value("goals", m.nav_goals);
      m.nav_trajectories = j.at("nav").value("trajectories", m.nav_trajectories);
    }
    for (const auto& v : m.variants) {
      if (v != "slam" && v != "dropout" && v != "gaussian" && v != "laplace" && v != "oracle") {
        throw ConfigError("manifest: unknown variant '" + v + "'");
      }
    }
    if (m.out.empty()) throw ConfigError("manifest: out must be set");
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

Manifest load_manifest(const fs::path& path) { return manifest_from_json(load_json(path)); }

json cmd_pipeline(const Manifest& m, bool verbose) {
  const fs::path out = m.out;
  ensure_dir(out);
  json resolved = manifest_to_json(m);
  json stages = json::array();
  auto log = [&](const std::string& msg) {
    if (verbose) std::cerr << "[pipeline] " << msg << '\n';
  };
  auto checksums = [&](const std::vector<fs::path>& files) {
    json c = json::object();
    for (const auto& f : files) c[relative_to(f, out)] = file_checksum(f);
    return c;
  };
  auto has = [&](const std::string& v) { return std::find(m.variants.begin(), m.variants.end(), v) != m.variants.end(); };

  const Scenario scenario = run_stage("simulate", [&] { return resolve_scenario(m.scenario); });
  const GridWorld world = run_stage("simulate", [&] { return build_world(scenario.world); });

  // simulate
  log("simulate");
  const fs::path train_dir = out / "data" / "train";
  const fs::path eval_dir = out / "data" / "eval";
  run_stage("simulate", [&] {
    SimulateOptions s;
    s.scenario = m.scenario;
    s.seed = m.seed;
    s.n_poses = m.train_poses;
    s.out = train_dir;
    s.stream = "simulate-train";
    cmd_simulate(s);
    s.n_poses = m.eval_poses;
    s.out = eval_dir;
    s.stream = "simulate-eval";
    cmd_simulate(s);
    return 0;
  });
  stages.push_back({{"name", "simulate"}, {"inputs", json::object()}});

  // train
  std::map<std::string, fs::path> artifacts;
  run_stage("train", [&] {
    for (const std::string kind : {"laplace", "gaussian", "dropout"}) {
      if (!has(kind)) continue;
      if (kind == "laplace" && !m.estimator.empty()) {
        artifacts[kind] = m.estimator;
        continue;
      }
      log("train " + kind);
      TrainOptions t;
      t.data = train_dir;
      t.kind = kind;
      t.train = kind == "dropout" ? m.dropout_train : m.train;
      t.train.seed = derive_seed(m.seed, "train-" + std::string(kind));
      t.out = out / "models" / (std::string(kind) + ".json");
      t.verbose = verbose;
      cmd_train(t);
      artifacts[kind] = t.out;
    }
    return 0;
  });
  {
    json inputs = checksums({train_dir / "poses.csv", train_dir / "scans.csv"});
    for (const auto& [k, p] : artifacts) resolved["artifacts"][k] = p.generic_string();
    stages.push_back({{"name", "train"}, {"inputs", inputs}});
  }

  // derive-spline
  fs::path spline_path = m.spline;
  const SplineModel spline = run_stage("derive-spline", [&] {
    if (!spline_path.empty()) return load_spline(spline_path);
    log("derive-spline");
    spline_path = out / "spline.json";
    SplineModel s = derive_spline();
    save_spline(s, spline_path);
    return s;
  });
  resolved["spline"] = spline_path.generic_string();
  stages.push_back({{"name", "derive-spline"}, {"inputs", json::object()}});

  // build-map
  const Dataset eval = run_stage("build-map", [&] { return read_dataset(eval_dir); });
  EstimatorContext ctx;
  ctx.max_range = eval.max_range;
  ctx.seed = m.seed;
  auto spec_of = [&](const std::string& v) -> std::string {
    if (v == "slam" || v == "oracle") return v;
    if (v == "dropout") return "dropout:" + artifacts.at(v).string();
    return "head:" + artifacts.at(v).string();
  };
  MapperConfig mc;
  mc.alpha = m.alpha;
  mc.max_range = eval.max_range;
  mc.fov = eval.fov;
  std::map<std::string, ProbabilityMap> maps;
  std::vector<NamedEstimator> estimators;
  run_stage("build-map", [&] {
    const NamedEstimator raw = make_estimator("raw", ctx);
    maps["slam-base"] = build_uncertainty_map(eval.scans, raw.estimate, spline, world.geometry(), mc);
    for (const auto& v : m.variants) {
      log("build-map " + v);
      NamedEstimator e = make_estimator(spec_of(v), ctx);
      maps[v] = v == "slam" ? maps["slam-base"]
                            : build_uncertainty_map(eval.scans, e.estimate, spline, world.geometry(), mc);
      export_map(maps[v], out / "maps" / v, m.seed);
      estimators.push_back(std::move(e));
    }
    return 0;
  });
  {
    json inputs = checksums({eval_dir / "poses.csv", eval_dir / "scans.csv", spline_path});
    for (const auto& [k, p] : artifacts) inputs[relative_to(p, out)] = file_checksum(p);
    stages.push_back({{"name", "build-map"}, {"inputs", inputs}});
  }

  // eval-loglik
  log("eval-loglik");
  run_stage("eval-loglik", [&] {
    const auto rows = evaluate_loglik(eval, estimators);
    write_text(out / "loglik.csv", loglik_csv(rows));
    write_text(out / "loglik.txt", loglik_table(rows));
    write_sidecar(out / "loglik.csv", m.seed);
    return 0;
  });
  stages.push_back({{"name", "eval-loglik"}, {"inputs", checksums({eval_dir / "scans.csv"})}});

  // nav-experiment
  log("nav-experiment");
  run_stage("nav-experiment", [&] {
    std::vector<MapVariant> variants;
    for (const auto& v : m.variants) {
      variants.push_back({v, v == "slam" ? maps.at(v) : layer_max(maps.at(v), maps.at("slam-base"))});
    }
    NavConfig nc;
    nc.seed = derive_seed(m.seed, "goals");
    nc.n_goals = m.nav_goals;
    nc.n_trajectories = m.nav_trajectories;
    const NavReport report = nav_experiment(world, variants, nc);
    ensure_dir(out / "nav");
    write_text(out / "nav" / "nav_report.csv", nav_report_csv(report));
    write_text(out / "nav" / "nav_details.csv", nav_details_csv(report));
    write_text(out / "nav" / "nav_report.txt", nav_report_table(report));
    write_sidecar(out / "nav" / "nav_report.csv", m.seed);
    write_sidecar(out / "nav" / "nav_details.csv", m.seed);
    return 0;
  });
  {
    std::vector<fs::path> inputs;
    for (const auto& v : m.variants) inputs.push_back(out / "maps" / (v + ".csv"));
    stages.push_back({{"name", "nav-experiment"}, {"inputs", checksums(inputs)}});
  }

  resolved["stages"] = stages;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  resolved["outputs"] = checksums(files);
  save_json(resolved, out / "manifest.json");
  return resolved;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  return 1;
}

}  // namespace umap
