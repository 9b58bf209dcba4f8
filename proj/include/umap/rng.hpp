#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace umap {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a, used for stream names and file checksums.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);

/// Derives an independent seed for a named sub-stream. The counter lets callers
/// split one stream per item (scan index, sample index) so results do not
/// depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t counter = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t counter = 0) {
  return Rng(derive_seed(seed, stream, counter));
}

/// Zero-mean Laplace sample with the given scale (inverse CDF).
double sample_laplace(Rng& rng, double scale);

double sample_gaussian(Rng& rng, double sigma);

double sample_uniform(Rng& rng, double lo, double hi);

}  // namespace umap
