#include "umap/map_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace umap {

std::uint8_t pgm_value(double p, double occupied_thresh, double free_thresh) {
  if (p >= occupied_thresh) return 0;
  if (p <= free_thresh) return 254;
  return 205;
}

void write_pgm(const ProbabilityMap& map, const std::filesystem::path& path, const PgmOptions& options) {
  const auto& g = map.geometry;
  std::vector<std::uint8_t> pixels(g.size());
  for (int iy = 0; iy < g.height; ++iy) {
    const auto row = static_cast<std::size_t>(g.height - 1 - iy) * static_cast<std::size_t>(g.width);
    for (int ix = 0; ix < g.width; ++ix) {
      pixels[row + static_cast<std::size_t>(ix)] =
          pgm_value(map.at({ix, iy}), options.occupied_thresh, options.free_thresh);
    }
  }
  for (const auto& c : options.overlay) {
    if (!g.contains(c)) continue;
    pixels[static_cast<std::size_t>(g.height - 1 - c.iy) * static_cast<std::size_t>(g.width) +
           static_cast<std::size_t>(c.ix)] = options.overlay_value;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << g.width << ' ' << g.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_map_yaml(const ProbabilityMap& map, const std::filesystem::path& yaml_path, const std::string& image_name,
                    std::uint64_t seed, const PgmOptions& options) {
  std::ofstream out(yaml_path);
  if (!out) throw DataError("cannot write " + yaml_path.string());
  out.precision(17);
  out << "image: " << image_name << '\n'
      << "resolution: " << map.geometry.resolution << '\n'
      << "origin: [" << map.geometry.origin.x << ", " << map.geometry.origin.y << ", 0.0]\n"
      << "negate: 0\n"
      << "occupied_thresh: " << options.occupied_thresh << '\n'
      << "free_thresh: " << options.free_thresh << '\n'
      << "seed: " << seed << '\n'
      << "schema: 1\n";
}

void write_probability_csv(const ProbabilityMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "ix,iy,x,y,p\n";
  char line[160];
  for (std::size_t i = 0; i < map.p.size(); ++i) {
    const CellIndex c = map.geometry.unlinear(i);
    const Vec2 v = map.geometry.center(c);
    std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%.17g\n", c.ix, c.iy, v.x, v.y, map.p[i]);
    out << line;
  }
}

ProbabilityMap read_probability_csv(const std::filesystem::path& path, const GridGeometry& geometry) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "ix,iy,x,y,p") throw DataError(path.string() + ": bad header");
  ProbabilityMap map{geometry, std::vector<double>(geometry.size(), 0.5)};
  std::vector<bool> seen(geometry.size(), false);
  std::size_t count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int ix = 0, iy = 0;
    double x = 0.0, y = 0.0, p = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &ix, &iy, &x, &y, &p) != 5) {
      throw DataError(path.string() + ": malformed row '" + line + "'");
    }
    const CellIndex c{ix, iy};
    if (!geometry.contains(c) || seen[geometry.linear(c)]) throw DataError(path.string() + ": bad or repeated cell");
    seen[geometry.linear(c)] = true;
    map.p[geometry.linear(c)] = p;
    ++count;
  }
  if (count != geometry.size()) throw DataError(path.string() + ": cell count does not match the geometry");
  return map;
}

}  // namespace umap
