#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace umap {

/// Invalid scenario, manifest, or parameter combination.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (length mismatches, bad files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values during training or evaluation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Floor applied to every uncertainty (sigma or Laplace scale) before use, in meters.
inline constexpr double kMinUncertainty = 1e-3;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class ModelKind { Gaussian, Laplace };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

}  // namespace umap
