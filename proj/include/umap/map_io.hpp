#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "umap/mapper.hpp"

namespace umap {

struct PgmOptions {
  double occupied_thresh = 0.65;
  double free_thresh = 0.196;
  /// Cells drawn on top of the map (for path overlays).
  std::span<const CellIndex> overlay;
  std::uint8_t overlay_value = 100;
};

/// Map-server pixel for a probability: 0 occupied, 254 free, 205 unknown.
std::uint8_t pgm_value(double p, double occupied_thresh = 0.65, double free_thresh = 0.196);

/// Binary PGM, one byte per cell, first row at the largest y.
void write_pgm(const ProbabilityMap& map, const std::filesystem::path& path, const PgmOptions& options = {});

/// Map-server style YAML next to a PGM (image, resolution, origin, negate,
/// thresholds) plus seed and schema.
void write_map_yaml(const ProbabilityMap& map, const std::filesystem::path& yaml_path,
                    const std::string& image_name, std::uint64_t seed, const PgmOptions& options = {});

/// Lossless long-format CSV: ix,iy,x,y,p with 17 significant digits.
void write_probability_csv(const ProbabilityMap& map, const std::filesystem::path& path);
/// Reads a CSV written by write_probability_csv back onto `geometry`.
ProbabilityMap read_probability_csv(const std::filesystem::path& path, const GridGeometry& geometry);

}  // namespace umap
