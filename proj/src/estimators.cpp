#include "umap/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace umap {

using nlohmann::json;

namespace {

// Smallest distance an estimate may report.
constexpr double kMinDistance = 1e-3;

std::size_t window_index(std::size_t ray, int offset, std::size_t n, bool circular) {
  const auto i = static_cast<long long>(ray) + offset;
  const auto len = static_cast<long long>(n);
  if (circular) return static_cast<std::size_t>(((i % len) + len) % len);
  return static_cast<std::size_t>(std::clamp(i, 0LL, len - 1));
}

std::size_t validate_dataset(std::span<const TrainingSample> data, bool need_y_hat) {
  if (data.empty()) throw DataError("training: dataset is empty");
  const std::size_t n = data.front().x.size();
  if (n == 0) throw DataError("training: scans must contain at least one ray");
  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto& d = data[s];
    if (d.x.size() != n || d.y_true.size() != n || (need_y_hat && d.y_hat.size() != n)) {
      throw DataError("training: sample " + std::to_string(s) + " has inconsistent ray count");
    }
  }
  return n;
}

// Precomputed per-ray inputs and residuals.
struct RayTable {
  std::size_t features = 0;
  std::vector<double> inputs;     // rays x features
  std::vector<double> targets;    // residual (head) or scaled distance (dropout)
  std::vector<std::size_t> scan_begin;  // first ray of each scan, plus end sentinel
};

RayTable head_table(const UncertaintyHead& head, std::span<const TrainingSample> data) {
  RayTable t;
  t.features = static_cast<std::size_t>(head.feature_size());
  for (const auto& d : data) {
    t.scan_begin.push_back(t.targets.size());
    for (std::size_t r = 0; r < d.x.size(); ++r) {
      const std::size_t at = t.inputs.size();
      t.inputs.resize(at + t.features);
      head.features(d.x, d.y_hat, r, std::span<double>(t.inputs).subspan(at, t.features));
      t.targets.push_back(d.y_hat[r] - d.y_true[r]);
    }
  }
  t.scan_begin.push_back(t.targets.size());
  return t;
}

// Mean NLL over rays [begin, end) of the table, gradient written into grad.
double table_loss(const UncertaintyHead& head, const RayTable& table, std::span<const std::size_t> scans,
                  std::span<double> grad, DenseNet::Trace& trace) {
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  std::size_t count = 0;
  const auto& cfg = head.config();
  for (std::size_t s : scans) {
    for (std::size_t r = table.scan_begin[s]; r < table.scan_begin[s + 1]; ++r) {
      const std::span<const double> in(table.inputs.data() + r * table.features, table.features);
      const double z = head.net().forward(in, &trace);
      double dz = 0.0;
      loss += nll_of_log_scale(cfg.kind, table.targets[r], z, cfg.max_range, &dz);
      head.net().backward(trace, dz, grad);
      ++count;
    }
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& g : grad) g *= inv;
  return loss * inv;
}

void check_finite(double loss, std::span<const double> grad, int epoch, const char* what) {
  bool ok = std::isfinite(loss);
  for (double g : grad) ok = ok && std::isfinite(g);
  if (!ok) {
    std::ostringstream msg;
    msg << what << ": non-finite loss or gradient at epoch " << epoch << " (loss = " << loss << ")";
    throw NumericError(msg.str());
  }
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t scans, int batch, Rng& rng) {
  std::vector<std::size_t> order(scans);
  std::iota(order.begin(), order.end(), 0);
  const auto per = static_cast<std::size_t>(std::max(1, batch));
  if (per < scans) std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < scans; i += per) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(scans, i + per)));
  }
  return batches;
}

}  // namespace

EstimatorOutput oracle_from_scan(const ScanPair& scan, double max_range, const ErrorModel& model, Rng& rng) {
  const std::size_t n = scan.y_true.size();
  if (!scan.hidden.empty() && scan.hidden.size() != n) throw DataError("oracle: hidden mask length mismatch");
  EstimatorOutput out;
  out.y_hat.resize(n);
  out.u_hat.kind = model.kind;
  out.u_hat.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool hidden = !scan.hidden.empty() && scan.hidden[i] != 0;
    const double scale = hidden ? model.hidden_scale : model.visible_scale;
    const double residual =
        model.kind == ModelKind::Laplace ? sample_laplace(rng, scale) : sample_gaussian(rng, scale);
    const double y = scan.y_true[i];
    out.y_hat[i] = y >= max_range ? max_range : std::clamp(y + residual, kMinDistance, max_range);
    out.u_hat.values[i] = std::max(scale, kMinUncertainty);
  }
  return out;
}

EstimatorOutput oracle_estimate(const GridWorld& world, const Pose2D& pose, const ErrorModel& model, Rng& rng) {
  ScanPair scan;
  scan.pose = pose;
  scan.y_true = true_distance_profile(world, pose);
  scan.hidden = hidden_rays(world, pose);
  return oracle_from_scan(scan, world.config().max_range, model, rng);
}

// ---------------------------------------------------------------------------
// UncertaintyHead

UncertaintyHead::UncertaintyHead(const HeadConfig& config, DenseNet net) : config_(config), net_(std::move(net)) {
  if (net_.input_size() != feature_size()) throw ConfigError("uncertainty head: network input size mismatch");
}

void UncertaintyHead::features(std::span<const double> x, std::span<const double> y_hat, std::size_t ray,
                               std::span<double> out) const {
  const int w = config_.window;
  const double inv = 1.0 / config_.max_range;
  std::size_t k = 0;
  for (int o = -w; o <= w; ++o) out[k++] = x[window_index(ray, o, x.size(), config_.circular)] * inv;
  for (int o = -w; o <= w; ++o) out[k++] = y_hat[window_index(ray, o, y_hat.size(), config_.circular)] * inv;
}

double UncertaintyHead::log_scale(std::span<const double> x, std::span<const double> y_hat, std::size_t ray) const {
  std::vector<double> in(static_cast<std::size_t>(feature_size()));
  features(x, y_hat, ray, in);
  return net_.forward(in);
}

UncertaintyHead make_head(const HeadConfig& config, std::uint64_t seed) {
  if (config.window < 0 || config.hidden1 < 1 || config.hidden2 < 1) throw ConfigError("uncertainty head: bad shape");
  if (!(config.max_range > 0.0)) throw ConfigError("uncertainty head: max_range must be positive");
  DenseNet net({2 * (2 * config.window + 1), config.hidden1, config.hidden2, 1}, Activation::Tanh);
  Rng rng = make_rng(seed, "head-init");
  net.initialize(rng, 0.1);
  return UncertaintyHead(config, std::move(net));
}

double nll_of_log_scale(ModelKind kind, double residual, double z, double max_range, double* dz) {
  const double r = std::min(std::abs(residual), max_range);
  if (kind == ModelKind::Laplace) {
    const double e = r * std::exp(-z);
    if (dz) *dz = 1.0 - e;
    return std::numbers::ln2 + z + e;
  }
  const double e = r * r * std::exp(-2.0 * z);
  if (dz) *dz = 1.0 - e;
  return 0.5 * std::log(2.0 * std::numbers::pi) + z + 0.5 * e;
}

double head_loss_and_gradient(const UncertaintyHead& head, std::span<const TrainingSample> data,
                              std::span<double> grad) {
  validate_dataset(data, true);
  if (grad.size() != head.net().parameter_count()) throw DataError("gradient buffer size mismatch");
  const RayTable table = head_table(head, data);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  DenseNet::Trace trace;
  return table_loss(head, table, all, grad, trace);
}

TrainResult train_uncertainty_head(std::span<const TrainingSample> data, const HeadConfig& config,
                                   const TrainConfig& train, const std::function<void(int, double)>& on_epoch) {
  validate_dataset(data, true);
  if (train.epochs < 0 || !(train.learning_rate > 0.0)) throw ConfigError("training: bad epochs or learning rate");
  TrainResult result{make_head(config, train.seed), {}};
  UncertaintyHead& head = result.head;
  const RayTable table = head_table(head, data);

  if (config.data_init) {
    double acc = 0.0;
    for (double r : table.targets) {
      const double a = std::min(std::abs(r), config.max_range);
      acc += config.kind == ModelKind::Laplace ? a : a * a;
    }
    acc /= static_cast<double>(table.targets.size());
    const double scale = config.kind == ModelKind::Laplace ? acc : std::sqrt(acc);
    head.net().output_bias() = std::log(std::max(scale, kMinUncertainty));
  }

  Adam adam(head.net().parameter_count(), train.learning_rate);
  std::vector<double> grad(head.net().parameter_count());
  DenseNet::Trace trace;
  Rng shuffle = make_rng(train.seed, "head-shuffle");

  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    double weighted = 0.0;
    std::size_t rays = 0;
    for (const auto& batch : make_batches(data.size(), train.batch, shuffle)) {
      const double loss = table_loss(head, table, batch, grad, trace);
      check_finite(loss, grad, epoch, "train_uncertainty_head");
      std::size_t n = 0;
      for (std::size_t s : batch) n += table.scan_begin[s + 1] - table.scan_begin[s];
      weighted += loss * static_cast<double>(n);
      rays += n;
      adam.step(head.net().parameters(), grad);
    }
    const double epoch_loss = weighted / static_cast<double>(rays);
    result.epoch_loss.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  for (double p : head.net().parameters()) {
    if (!std::isfinite(p)) throw NumericError("train_uncertainty_head: parameters became non-finite");
  }
  return result;
}

UncertaintyVector predict_uncertainty(const UncertaintyHead& head, std::span<const double> x,
                                      std::span<const double> y_hat) {
  if (x.size() != y_hat.size() || x.empty()) throw DataError("predict_uncertainty: x and y_hat must match in length");
  for (double p : head.net().parameters()) {
    if (!std::isfinite(p)) throw NumericError("predict_uncertainty: head has non-finite parameters");
  }
  UncertaintyVector u;
  u.kind = head.kind();
  u.values.resize(x.size());
  std::vector<double> in(static_cast<std::size_t>(head.feature_size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    head.features(x, y_hat, i, in);
    const double z = head.net().forward(in);
    u.values[i] = std::clamp(std::exp(z), kMinUncertainty, head.config().max_range);
  }
  return u;
}

// ---------------------------------------------------------------------------
// MC-Dropout

void DropoutNet::features(std::span<const double> x, std::size_t ray, std::span<double> out) const {
  const int w = config.window;
  const double inv = 1.0 / config.max_range;
  std::size_t k = 0;
  for (int o = -w; o <= w; ++o) out[k++] = x[window_index(ray, o, x.size(), config.circular)] * inv;
}

DropoutNet train_dropout_net(std::span<const TrainingSample> data, const DropoutConfig& config,
                             const TrainConfig& train, const std::function<void(int, double)>& on_epoch) {
  validate_dataset(data, false);
  if (!(config.drop_p > 0.0 && config.drop_p < 1.0)) throw ConfigError("dropout: p must lie in (0, 1)");
  if (config.samples < 2) throw ConfigError("dropout: need at least 2 samples");
  DropoutNet dn{config, DenseNet({2 * config.window + 1, config.hidden1, config.hidden2, 1}, Activation::Relu)};
  Rng init = make_rng(train.seed, "dropout-init");
  dn.net.initialize(init, 0.1);

  RayTable table;
  table.features = static_cast<std::size_t>(dn.feature_size());
  double mean_target = 0.0;
  for (const auto& d : data) {
    table.scan_begin.push_back(table.targets.size());
    for (std::size_t r = 0; r < d.x.size(); ++r) {
      const std::size_t at = table.inputs.size();
      table.inputs.resize(at + table.features);
      dn.features(d.x, r, std::span<double>(table.inputs).subspan(at, table.features));
      table.targets.push_back(d.y_true[r] / config.max_range);
      mean_target += table.targets.back();
    }
  }
  table.scan_begin.push_back(table.targets.size());
  dn.net.output_bias() = mean_target / static_cast<double>(table.targets.size());

  Adam adam(dn.net.parameter_count(), train.learning_rate);
  std::vector<double> grad(dn.net.parameter_count());
  DenseNet::Trace trace;
  Rng shuffle = make_rng(train.seed, "dropout-shuffle");
  Rng masks = make_rng(train.seed, "dropout-train");
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_rays = 0;
    for (const auto& batch : make_batches(data.size(), train.batch, shuffle)) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      std::size_t count = 0;
      for (std::size_t s : batch) {
        for (std::size_t r = table.scan_begin[s]; r < table.scan_begin[s + 1]; ++r) {
          const std::span<const double> in(table.inputs.data() + r * table.features, table.features);
          const double out = dn.net.forward_dropout(in, config.drop_p, masks, &trace);
          const double err = out - table.targets[r];
          loss += err * err;
          dn.net.backward(trace, 2.0 * err, grad);
          ++count;
        }
      }
      const double inv = 1.0 / static_cast<double>(count);
      for (double& g : grad) g *= inv;
      check_finite(loss * inv, grad, epoch, "train_dropout_net");
      adam.step(dn.net.parameters(), grad);
      epoch_loss += loss;
      epoch_rays += count;
    }
    if (on_epoch) on_epoch(epoch, epoch_loss / static_cast<double>(epoch_rays));
  }
  return dn;
}

EstimatorOutput mc_dropout_estimate(const DropoutNet& net, std::span<const double> x, std::uint64_t seed,
                                    Spread spread) {
  const auto& cfg = net.config;
  if (cfg.samples < 2) throw ConfigError("mc_dropout_estimate: need at least 2 samples");
  if (x.empty()) throw DataError("mc_dropout_estimate: empty scan");
  const std::size_t n = x.size();
  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  std::vector<double> in(static_cast<std::size_t>(net.feature_size()));
  for (int s = 0; s < cfg.samples; ++s) {
    Rng rng = make_rng(seed, "mc-dropout", static_cast<std::uint64_t>(s));
    for (std::size_t i = 0; i < n; ++i) {
      net.features(x, i, in);
      const double v = net.net.forward_dropout(in, cfg.drop_p, rng) * cfg.max_range;
      // Welford update in fixed sample order.
      const double delta = v - mean[i];
      mean[i] += delta / (s + 1);
      m2[i] += delta * (v - mean[i]);
    }
  }
  EstimatorOutput out;
  out.y_hat.resize(n);
  out.u_hat.kind = ModelKind::Gaussian;
  out.u_hat.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double var = m2[i] / (cfg.samples - 1);
    const double u = spread == Spread::StdDev ? std::sqrt(var) : var;
    out.y_hat[i] = std::clamp(mean[i], kMinDistance, cfg.max_range);
    out.u_hat.values[i] = std::max(u, kMinUncertainty);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Estimator adapters

Estimator raw_scan_estimator(double sigma) {
  return [sigma](const ScanPair& scan, std::size_t) {
    EstimatorOutput out;
    out.y_hat = scan.x_scan;
    out.u_hat.values.assign(scan.x_scan.size(), std::max(sigma, kMinUncertainty));
    return out;
  };
}

Estimator oracle_estimator(const ErrorModel& model, double max_range, std::uint64_t seed) {
  return [model, max_range, seed](const ScanPair& scan, std::size_t index) {
    Rng rng = make_rng(seed, "oracle", index);
    return oracle_from_scan(scan, max_range, model, rng);
  };
}

Estimator head_estimator(Estimator distance, UncertaintyHead head) {
  return [distance = std::move(distance), head = std::move(head)](const ScanPair& scan, std::size_t index) {
    EstimatorOutput out = distance(scan, index);
    out.u_hat = predict_uncertainty(head, scan.x_scan, out.y_hat);
    return out;
  };
}

Estimator dropout_estimator(DropoutNet net, std::uint64_t seed, Spread spread) {
  return [net = std::move(net), seed, spread](const ScanPair& scan, std::size_t index) {
    return mc_dropout_estimate(net, scan.x_scan, derive_seed(seed, "mc-scan", index), spread);
  };
}

// ---------------------------------------------------------------------------
// Artifacts

namespace {

json net_shape(const DenseNet& net) {
  return {{"layers", net.layer_sizes()}, {"activation", net.activation() == Activation::Tanh ? "tanh" : "relu"}};
}

DenseNet net_from(const json& j) {
  const auto act = j.at("activation").get<std::string>() == "tanh" ? Activation::Tanh : Activation::Relu;
  DenseNet net(j.at("layers").get<std::vector<int>>(), act);
  const auto params = j.at("parameters").get<std::vector<double>>();
  if (params.size() != net.parameter_count()) throw ConfigError("artifact: parameter count mismatch");
  std::copy(params.begin(), params.end(), net.parameters().begin());
  return net;
}

}  // namespace

json head_to_json(const UncertaintyHead& head) {
  const auto& c = head.config();
  json j = net_shape(head.net());
  j["schema"] = kArtifactSchema;
  j["type"] = "uncertainty_head";
  j["model_kind"] = to_string(c.kind);
  j["window"] = c.window;
  j["max_range"] = c.max_range;
  j["circular"] = c.circular;
  j["parameters"] = std::vector<double>(head.net().parameters().begin(), head.net().parameters().end());
  return j;
}

UncertaintyHead head_from_json(const json& j) {
  try {
    if (j.at("schema").get<int>() != kArtifactSchema || j.at("type").get<std::string>() != "uncertainty_head") {
      throw ConfigError("artifact is not a schema-1 uncertainty head");
    }
    HeadConfig c;
    c.kind = model_kind_from_string(j.at("model_kind").get<std::string>());
    c.window = j.at("window").get<int>();
    c.max_range = j.at("max_range").get<double>();
    c.circular = j.value("circular", true);
    DenseNet net = net_from(j);
    const auto& layers = net.layer_sizes();
    if (layers.size() != 4) throw ConfigError("uncertainty head: expected two hidden layers");
    c.hidden1 = layers[1];
    c.hidden2 = layers[2];
    return UncertaintyHead(c, std::move(net));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("uncertainty head: ") + e.what());
  }
}

json dropout_to_json(const DropoutNet& dn) {
  const auto& c = dn.config;
  json j = net_shape(dn.net);
  j["schema"] = kArtifactSchema;
  j["type"] = "dropout_net";
  j["window"] = c.window;
  j["drop_p"] = c.drop_p;
  j["samples"] = c.samples;
  j["max_range"] = c.max_range;
  j["circular"] = c.circular;
  j["parameters"] = std::vector<double>(dn.net.parameters().begin(), dn.net.parameters().end());
  return j;
}

DropoutNet dropout_from_json(const json& j) {
  try {
    if (j.at("schema").get<int>() != kArtifactSchema || j.at("type").get<std::string>() != "dropout_net") {
      throw ConfigError("artifact is not a schema-1 dropout net");
    }
    DropoutNet dn;
    dn.config.window = j.at("window").get<int>();
    dn.config.drop_p = j.at("drop_p").get<double>();
    dn.config.samples = j.at("samples").get<int>();
    dn.config.max_range = j.at("max_range").get<double>();
    dn.config.circular = j.value("circular", true);
    dn.net = net_from(j);
    const auto& layers = dn.net.layer_sizes();
    if (layers.size() != 4) throw ConfigError("dropout net: expected two hidden layers");
    dn.config.hidden1 = layers[1];
    dn.config.hidden2 = layers[2];
    return dn;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dropout net: ") + e.what());
  }
}

void save_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace umap
