#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "umap/estimators.hpp"
#include "umap/world.hpp"

namespace umap {

inline constexpr int kDatasetSchema = 1;

/// Scans captured along a pose sequence. On disk:
///   poses.csv  pose,x,y,theta
///   scans.csv  pose,ray,angle,x_scan,y_true,hidden
/// each with a <file>.meta.json sidecar carrying seed and schema.
struct Dataset {
  std::vector<ScanPair> scans;
  int n_rays = 0;
  double max_range = 0.0;
  double fov = 0.0;
  std::uint64_t seed = 0;
};

Dataset simulate_dataset(const GridWorld& world, const std::vector<Pose2D>& poses, double noise_sigma,
                         std::uint64_t seed, std::string_view stream = "simulate");

void write_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

/// Sidecar written next to every output file.
void write_sidecar(const std::filesystem::path& file, std::uint64_t seed, const nlohmann::json& extra = {});
std::filesystem::path sidecar_path(const std::filesystem::path& file);

/// FNV-1a of the file contents, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& file);

/// Pairs every scan with an oracle distance estimate for training.
std::vector<TrainingSample> training_samples(const Dataset& data, const Estimator& distance);

}  // namespace umap
