#include "curb/pointcloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "curb/errors.hpp"

namespace curb {
namespace {

static_assert(std::endian::native == std::endian::little, "scan I/O assumes a little-endian host");

constexpr char kScanMagic[4] = {'L', 'C', 'R', 'B'};
constexpr std::uint32_t kScanVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated scan file");
  return v;
}

}  // namespace

void TrimConfig::validate() const {
  if (!(max_below > 0.0) || !(max_x_abs > 0.0) || !(max_z_abs > 0.0)) {
    throw ConfigError("trim limits must be positive");
  }
}

LidarScan trim_scan(const LidarScan& scan, const TrimConfig& cfg) {
  LidarScan out;
  out.timestamp = scan.timestamp;
  out.points.reserve(scan.points.size());
  for (const auto& p : scan.points) {
    if (p.y > 0.0f) continue;
    if (p.y < -cfg.max_below) continue;
    if (std::abs(p.x) > cfg.max_x_abs) continue;
    if (std::abs(p.z) > cfg.max_z_abs) continue;
    out.points.push_back(p);
  }
  return out;
}

LidarScan integrate_scans(std::span<const LidarScan> scans, const Trajectory& traj, Micros reference_t) {
  LidarScan out;
  out.timestamp = reference_t;
  std::size_t total = 0;
  for (const auto& s : scans) total += s.points.size();
  out.points.reserve(total);

  for (const auto& s : scans) {
    const Transform t = traj.relative_transform(reference_t, s.timestamp);
    const Eigen::Matrix3f r = t.rotation.cast<float>();
    const Eigen::Vector3f tr = t.translation.cast<float>();
    const bool is_identity = t.rotation.isIdentity(0.0) && t.translation.isZero(0.0);
    for (const auto& p : s.points) {
      if (is_identity) {
        out.points.push_back(p);
        continue;
      }
      const Eigen::Vector3f q = r * Eigen::Vector3f(p.x, p.y, p.z) + tr;
      out.points.push_back({q.x(), q.y(), q.z(), p.intensity});
    }
  }
  return out;
}

std::vector<std::size_t> select_window(std::span<const LidarScan> scans, Micros reference_t, std::size_t window) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    if (scans[i].timestamp <= reference_t) idx.push_back(i);
  }
  if (idx.size() > window) idx.erase(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(window));
  return idx;
}

void write_scan(const std::filesystem::path& path, const LidarScan& scan) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write scan " + path.string());
  out.write(kScanMagic, 4);
  put<std::uint32_t>(out, kScanVersion);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(scan.timestamp));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(scan.points.size()));
  for (const auto& p : scan.points) {
    put(out, p.x);
    put(out, p.y);
    put(out, p.z);
    put(out, p.intensity);
  }
}

LidarScan read_scan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open scan " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kScanMagic, 4) != 0) throw FormatError("bad scan magic in " + path.string());
  if (get<std::uint32_t>(in) != kScanVersion) throw FormatError("unsupported scan version in " + path.string());
  LidarScan scan;
  scan.timestamp = static_cast<Micros>(get<std::uint64_t>(in));
  const auto n = get<std::uint32_t>(in);
  scan.points.resize(n);
  for (auto& p : scan.points) {
    p.x = get<float>(in);
    p.y = get<float>(in);
    p.z = get<float>(in);
    p.intensity = get<float>(in);
  }
  return scan;
}

}  // namespace curb
