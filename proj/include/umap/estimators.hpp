#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "umap/network.hpp"
#include "umap/sensor_models.hpp"
#include "umap/world.hpp"

namespace umap {

/// Distance estimate and its uncertainty for every ray of one scan.
struct EstimatorOutput {
  std::vector<double> y_hat;
  UncertaintyVector u_hat;
};

/// Residual distribution of the synthetic oracle estimator. Rays whose first
/// true obstacle is hidden from the laser use `hidden_scale`, all others
/// `visible_scale`.
struct ErrorModel {
  ModelKind kind = ModelKind::Laplace;
  double visible_scale = 0.02;
  double hidden_scale = 0.05;
};

/// Oracle estimate from a captured scan: y_hat = y_true + residual, clamped to
/// (0, max_range]; u_hat is the generating scale (floored at kMinUncertainty).
/// Rays without a return keep y_hat = max_range.
EstimatorOutput oracle_from_scan(const ScanPair& scan, double max_range, const ErrorModel& model, Rng& rng);

/// Oracle estimate straight from the world at a pose.
EstimatorOutput oracle_estimate(const GridWorld& world, const Pose2D& pose, const ErrorModel& model, Rng& rng);

/// One training record: raw scan, distance estimate, ground truth.
struct TrainingSample {
  std::vector<double> x;
  std::vector<double> y_hat;
  std::vector<double> y_true;
};

struct TrainConfig {
  int epochs = 2000;
  double learning_rate = 1e-4;
  /// Scans per mini-batch.
  int batch = 32;
  std::uint64_t seed = 0;
};

struct HeadConfig {
  ModelKind kind = ModelKind::Laplace;
  int window = 4;
  int hidden1 = 32;
  int hidden2 = 32;
  double max_range = 15.0;
  /// Wrap the feature window around the scan (full-circle lidar).
  bool circular = true;
  /// Start the output bias at the closed-form constant MLE of the data.
  bool data_init = true;
};

/// Per-ray windowed MLP mapping (x, y_hat) around ray i to a positive scale
/// exp(z). Weights are shared across rays.
class UncertaintyHead {
 public:
  UncertaintyHead() = default;
  UncertaintyHead(const HeadConfig& config, DenseNet net);

  const HeadConfig& config() const { return config_; }
  ModelKind kind() const { return config_.kind; }
  const DenseNet& net() const { return net_; }
  DenseNet& net() { return net_; }

  int feature_size() const { return 2 * (2 * config_.window + 1); }

  /// Inputs for ray i: the x and y_hat windows, each divided by max_range.
  void features(std::span<const double> x, std::span<const double> y_hat, std::size_t ray,
                std::span<double> out) const;

  /// Raw log-scale output z for one ray.
  double log_scale(std::span<const double> x, std::span<const double> y_hat, std::size_t ray) const;

 private:
  HeadConfig config_;
  DenseNet net_;
};

/// Untrained head with seeded initial weights.
UncertaintyHead make_head(const HeadConfig& config, std::uint64_t seed);

/// Mean negative log-likelihood over every ray in `data` and its gradient with
/// respect to the head parameters (grad is overwritten).
double head_loss_and_gradient(const UncertaintyHead& head, std::span<const TrainingSample> data,
                              std::span<double> grad);

/// Per-ray negative log-likelihood of the family as a function of z = ln(u),
/// with d/dz in `dz`. The residual is capped at max_range.
double nll_of_log_scale(ModelKind kind, double residual, double z, double max_range, double* dz);

struct TrainResult {
  UncertaintyHead head;
  /// Mean training loss of every epoch, measured before that epoch's updates
  /// when the batch covers the whole dataset, otherwise averaged over batches.
  std::vector<double> epoch_loss;
};

/// Minimizes the mean NLL with Adam. Throws DataError on an empty or
/// inconsistent dataset and NumericError if the loss becomes non-finite.
TrainResult train_uncertainty_head(std::span<const TrainingSample> data, const HeadConfig& config,
                                   const TrainConfig& train,
                                   const std::function<void(int, double)>& on_epoch = {});

/// Positive scale per ray, clamped to [kMinUncertainty, max_range].
UncertaintyVector predict_uncertainty(const UncertaintyHead& head, std::span<const double> x,
                                      std::span<const double> y_hat);

// ---------------------------------------------------------------------------
// MC-Dropout baseline

struct DropoutConfig {
  int window = 4;
  int hidden1 = 32;
  int hidden2 = 32;
  double drop_p = 0.5;
  int samples = 50;
  double max_range = 15.0;
  bool circular = true;
};

/// Distance network trained with dropout kept active at test time.
struct DropoutNet {
  DropoutConfig config;
  DenseNet net;

  int feature_size() const { return 2 * config.window + 1; }
  void features(std::span<const double> x, std::size_t ray, std::span<double> out) const;
};

/// Trains on squared error of y_hat / max_range with dropout active.
DropoutNet train_dropout_net(std::span<const TrainingSample> data, const DropoutConfig& config,
                             const TrainConfig& train, const std::function<void(int, double)>& on_epoch = {});

enum class Spread { StdDev, Variance };

/// `samples` stochastic passes per ray: y_hat is the sample mean, u_hat the
/// sample standard deviation (or variance), floored at kMinUncertainty.
/// Sample s draws its masks from a stream derived from (seed, s).
EstimatorOutput mc_dropout_estimate(const DropoutNet& net, std::span<const double> x, std::uint64_t seed,
                                    Spread spread = Spread::StdDev);

// ---------------------------------------------------------------------------
// Estimators pluggable into the map builder

/// Produces an estimate for one scan; `index` is the scan's position in the
/// input sequence and seeds any per-scan randomness.
using Estimator = std::function<EstimatorOutput(const ScanPair& scan, std::size_t index)>;

/// y_hat = raw scan, constant uncertainty.
Estimator raw_scan_estimator(double sigma);
Estimator oracle_estimator(const ErrorModel& model, double max_range, std::uint64_t seed);
/// Distances from `distance`, uncertainty from the trained head.
Estimator head_estimator(Estimator distance, UncertaintyHead head);
Estimator dropout_estimator(DropoutNet net, std::uint64_t seed, Spread spread = Spread::StdDev);

// ---------------------------------------------------------------------------
// Artifacts

inline constexpr int kArtifactSchema = 1;

nlohmann::json head_to_json(const UncertaintyHead& head);
UncertaintyHead head_from_json(const nlohmann::json& j);
nlohmann::json dropout_to_json(const DropoutNet& net);
DropoutNet dropout_from_json(const nlohmann::json& j);

void save_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace umap
