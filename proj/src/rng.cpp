#include "umap/rng.hpp"

#include <cmath>

#include "umap/common.hpp"

namespace umap {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t counter) {
  return splitmix64(splitmix64(seed ^ fnv1a64(stream)) + counter);
}

double sample_laplace(Rng& rng, double scale) {
  if (scale <= 0.0) return 0.0;
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const double v = u(rng);
  // 1 - 2|v| lies in (0, 1]; the open endpoint at -0.5 is never drawn.
  return -scale * std::copysign(1.0, v) * std::log1p(-2.0 * std::abs(v));
}

double sample_gaussian(Rng& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  std::normal_distribution<double> n(0.0, sigma);
  return n(rng);
}

double sample_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::Gaussian ? "gaussian" : "laplace";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "gaussian") return ModelKind::Gaussian;
  if (name == "laplace") return ModelKind::Laplace;
  throw ConfigError("unknown model kind '" + name + "' (expected gaussian or laplace)");
}

}  // namespace umap
