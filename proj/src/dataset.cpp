#include "umap/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace umap {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double to_double(const std::string& s, const std::filesystem::path& file) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(file.string() + ": bad number '" + s + "'");
  }
}

}  // namespace

Dataset simulate_dataset(const GridWorld& world, const std::vector<Pose2D>& poses, double noise_sigma,
                         std::uint64_t seed, std::string_view stream) {
  Dataset d;
  d.n_rays = world.config().n_rays;
  d.max_range = world.config().max_range;
  d.fov = world.config().fov;
  d.seed = seed;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    Rng rng = make_rng(seed, stream, i);
    d.scans.push_back(capture_scan(world, poses[i], noise_sigma, rng));
  }
  return d;
}

std::filesystem::path sidecar_path(const std::filesystem::path& file) {
  return file.string() + ".meta.json";
}

void write_sidecar(const std::filesystem::path& file, std::uint64_t seed, const json& extra) {
  json j = extra.is_object() ? extra : json::object();
  j["schema"] = kDatasetSchema;
  j["seed"] = seed;
  j["file"] = file.filename().string();
  auto out = open_out(sidecar_path(file));
  out << j.dump(2) << '\n';
}

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  const auto poses_path = dir / "poses.csv";
  const auto scans_path = dir / "scans.csv";
  char line[256];
  {
    auto out = open_out(poses_path);
    out << "pose,x,y,theta\n";
    for (std::size_t i = 0; i < data.scans.size(); ++i) {
      const auto& p = data.scans[i].pose;
      std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", i, p.x, p.y, p.theta);
      out << line;
    }
  }
  {
    auto out = open_out(scans_path);
    out << "pose,ray,angle,x_scan,y_true,hidden\n";
    for (std::size_t i = 0; i < data.scans.size(); ++i) {
      const auto& s = data.scans[i];
      const auto angles = scan_angles(s.pose, data.n_rays, data.fov);
      for (std::size_t r = 0; r < s.x_scan.size(); ++r) {
        std::snprintf(line, sizeof line, "%zu,%zu,%.17g,%.17g,%.17g,%d\n", i, r, angles[r], s.x_scan[r], s.y_true[r],
                      s.hidden.empty() ? 0 : static_cast<int>(s.hidden[r]));
        out << line;
      }
    }
  }
  const json meta = {{"n_poses", data.scans.size()},
                     {"n_rays", data.n_rays},
                     {"max_range", data.max_range},
                     {"fov", data.fov}};
  write_sidecar(poses_path, data.seed, meta);
  write_sidecar(scans_path, data.seed, meta);
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const auto poses_path = dir / "poses.csv";
  const auto scans_path = dir / "scans.csv";
  Dataset d;
  {
    std::ifstream in(sidecar_path(scans_path));
    if (!in) throw DataError("missing " + sidecar_path(scans_path).string());
    try {
      json meta;
      in >> meta;
      if (meta.at("schema").get<int>() != kDatasetSchema) throw DataError("unsupported dataset schema");
      d.n_rays = meta.at("n_rays").get<int>();
      d.max_range = meta.at("max_range").get<double>();
      d.fov = meta.at("fov").get<double>();
      d.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw DataError(sidecar_path(scans_path).string() + ": " + e.what());
    }
  }
  std::ifstream poses(poses_path);
  if (!poses) throw DataError("cannot open " + poses_path.string());
  std::string line;
  if (!std::getline(poses, line) || line != "pose,x,y,theta") throw DataError(poses_path.string() + ": bad header");
  while (std::getline(poses, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 4 || std::stoul(c[0]) != d.scans.size()) throw DataError(poses_path.string() + ": bad row");
    ScanPair s;
    s.pose = {to_double(c[1], poses_path), to_double(c[2], poses_path), to_double(c[3], poses_path)};
    d.scans.push_back(std::move(s));
  }
  std::ifstream scans(scans_path);
  if (!scans) throw DataError("cannot open " + scans_path.string());
  if (!std::getline(scans, line) || line != "pose,ray,angle,x_scan,y_true,hidden") {
    throw DataError(scans_path.string() + ": bad header");
  }
  while (std::getline(scans, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 6) throw DataError(scans_path.string() + ": bad row");
    const std::size_t pose = std::stoul(c[0]);
    if (pose >= d.scans.size()) throw DataError(scans_path.string() + ": unknown pose index");
    auto& s = d.scans[pose];
    if (std::stoul(c[1]) != s.x_scan.size()) throw DataError(scans_path.string() + ": rays out of order");
    s.x_scan.push_back(to_double(c[3], scans_path));
    s.y_true.push_back(to_double(c[4], scans_path));
    s.hidden.push_back(static_cast<std::uint8_t>(c[5] == "1"));
  }
  for (const auto& s : d.scans) {
    if (static_cast<int>(s.x_scan.size()) != d.n_rays) throw DataError(scans_path.string() + ": ray count mismatch");
  }
  return d;
}

std::string file_checksum(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open " + file.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return hex;
}

std::vector<TrainingSample> training_samples(const Dataset& data, const Estimator& distance) {
  std::vector<TrainingSample> out;
  out.reserve(data.scans.size());
  for (std::size_t i = 0; i < data.scans.size(); ++i) {
    const auto& s = data.scans[i];
    out.push_back({s.x_scan, distance(s, i).y_hat, s.y_true});
  }
  return out;
}

}  // namespace umap
