#include "curb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "curb/errors.hpp"
#include "curb/rng.hpp"

namespace curb {

namespace {

using json = nlohmann::json;

constexpr double kStraightEps = 1e-12;
constexpr double kDeg = std::numbers::pi / 180.0;

struct ObstacleShape {
  ObstacleKind kind;
  double length, width, height, weight;
};

constexpr ObstacleShape kShapes[] = {
    {ObstacleKind::Car, 4.5, 1.8, 1.5, 0.5},
    {ObstacleKind::Van, 5.5, 2.0, 2.2, 0.15},
    {ObstacleKind::Bin, 0.6, 0.6, 1.1, 0.2},
    {ObstacleKind::Cone, 0.4, 0.4, 0.7, 0.15},
};

// Keeps the footprint inside the 0.5-3.0 m band even where the road bends
// under a long box.
constexpr double kGapMin = 0.5;
constexpr double kGapMax = 3.0;
constexpr double kGapMargin = 0.08;

const char* kind_name(ObstacleKind k) {
  switch (k) {
    case ObstacleKind::Car: return "car";
    case ObstacleKind::Van: return "van";
    case ObstacleKind::Bin: return "bin";
    case ObstacleKind::Cone: return "cone";
  }
  return "car";
}

ObstacleKind kind_from_name(const std::string& s) {
  if (s == "car") return ObstacleKind::Car;
  if (s == "van") return ObstacleKind::Van;
  if (s == "bin") return ObstacleKind::Bin;
  if (s == "cone") return ObstacleKind::Cone;
  throw FormatError("unknown obstacle kind: " + s);
}

Point2 right_normal(double heading) { return {std::cos(heading), -std::sin(heading)}; }

double material_intensity(Material m) {
  switch (m) {
    case Material::Road: return 0.2;
    case Material::Curb: return 0.5;
    case Material::Obstacle: return 0.7;
  }
  return 0.0;
}

// Smallest t in [lo, hi] where the horizontal trace of the ray crosses a curb line.
std::optional<double> first_curb_crossing(const RoadSpec& road, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                                          double lo, double hi) {
  std::optional<double> best;
  auto consider = [&](double t) {
    if (t >= lo && t <= hi && (!best || t < *best)) best = t;
  };
  const double half = 0.5 * road.width;
  if (std::abs(road.curvature) < kStraightEps) {
    if (d.x() != 0.0) {
      consider((half - o.x()) / d.x());
      consider((-half - o.x()) / d.x());
    }
    return best;
  }
  const double radius = 1.0 / std::abs(road.curvature);
  const double cx = 1.0 / road.curvature;
  const double ox = o.x() - cx;
  const double a = d.x() * d.x() + d.z() * d.z();
  if (a < 1e-18) return best;
  const double b = 2.0 * (ox * d.x() + o.z() * d.z());
  for (double rb : {radius - half, radius + half}) {
    const double c = ox * ox + o.z() * o.z() - rb * rb;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    consider((-b - sq) / (2.0 * a));
    consider((-b + sq) / (2.0 * a));
  }
  return best;
}

std::optional<double> hit_box(const Obstacle& ob, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  const double c = std::cos(ob.yaw);
  const double s = std::sin(ob.yaw);
  const double px = o.x() - ob.cx;
  const double pz = o.z() - ob.cz;
  const double lo[3] = {-0.5 * ob.width, ob.base_y, -0.5 * ob.length};
  const double hi[3] = {0.5 * ob.width, ob.base_y + ob.height, 0.5 * ob.length};
  const double org[3] = {c * px - s * pz, o.y(), s * px + c * pz};
  const double dir[3] = {c * d.x() - s * d.z(), d.y(), s * d.x() + c * d.z()};
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (dir[i] == 0.0) {
      if (org[i] < lo[i] || org[i] > hi[i]) return std::nullopt;
      continue;
    }
    double ta = (lo[i] - org[i]) / dir[i];
    double tb = (hi[i] - org[i]) / dir[i];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1 || t0 <= 0.0) return std::nullopt;
  return t0;
}

// Cyrus-Beck test of the segment origin -> (x, z) against a convex polygon.
bool segment_hits_polygon(double x, double z, const std::vector<Point2>& poly) {
  double cxs = 0.0, czs = 0.0;
  for (const auto& p : poly) {
    cxs += p.x;
    czs += p.z;
  }
  cxs /= static_cast<double>(poly.size());
  czs /= static_cast<double>(poly.size());
  double t_lo = 0.0, t_hi = 1.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    double nx = b.z - a.z;
    double nz = -(b.x - a.x);
    if (nx * (cxs - a.x) + nz * (czs - a.z) > 0.0) {
      nx = -nx;
      nz = -nz;
    }
    const double num = nx * a.x + nz * a.z;
    const double den = nx * x + nz * z;
    if (den == 0.0) {
      if (num < 0.0) return false;
      continue;
    }
    const double t = num / den;
    if (den > 0.0) {
      t_hi = std::min(t_hi, t);
    } else {
      t_lo = std::max(t_lo, t);
    }
    if (t_lo >= t_hi) return false;
  }
  return t_lo < t_hi;
}

json grid_to_json(const GridSpec& g) { return {{"width", g.width}, {"height", g.height}, {"resolution", g.resolution}}; }

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.width = j.at("width").get<int>();
  g.height = j.at("height").get<int>();
  g.resolution = j.at("resolution").get<double>();
  g.validate();
  return g;
}

std::string frame_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

}  // namespace

Point2 RoadSpec::centre(double s) const {
  if (std::abs(curvature) < kStraightEps) return {0.0, s};
  const double th = curvature * s;
  return {(1.0 - std::cos(th)) / curvature, std::sin(th) / curvature};
}

double RoadSpec::heading(double s) const { return curvature * s; }

double RoadSpec::lateral(double x, double z) const {
  if (std::abs(curvature) < kStraightEps) return x;
  const double radius = 1.0 / std::abs(curvature);
  const double rho = std::hypot(x - 1.0 / curvature, z);
  return (curvature > 0.0 ? 1.0 : -1.0) * (radius - rho);
}

double RoadSpec::station(double x, double z) const {
  if (std::abs(curvature) < kStraightEps) return z;
  const double th = std::atan2(curvature * z, -curvature * (x - 1.0 / curvature));
  return th / curvature;
}

std::vector<Point2> Obstacle::footprint() const {
  const Point2 f{std::sin(yaw), std::cos(yaw)};
  const Point2 r{std::cos(yaw), -std::sin(yaw)};
  const double hw = 0.5 * width;
  const double hl = 0.5 * length;
  std::vector<Point2> out;
  for (auto [a, b] : {std::pair{-hw, -hl}, {hw, -hl}, {hw, hl}, {-hw, hl}}) {
    out.push_back({cx + a * r.x + b * f.x, cz + a * r.z + b * f.z});
  }
  return out;
}

SceneSpec generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
  std::mt19937_64 rng(derive_seed(seed, 0x5CE7E));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SceneSpec scene;
  scene.seed = seed;
  RoadSpec& road = scene.road;
  if (unit(rng) >= cfg.straight_probability) {
    const double radius = uniform(cfg.min_radius, cfg.max_radius);
    road.curvature = (unit(rng) < 0.5 ? -1.0 : 1.0) / radius;
  }
  road.width = uniform(cfg.min_width, cfg.max_width);

  for (double side : {-1.0, 1.0}) {
    Polyline line;
    const int n = static_cast<int>(std::floor((road.s_end - road.s_begin) / cfg.curb_sample_step)) + 1;
    for (int i = 0; i < n; ++i) {
      const double s = road.s_begin + i * cfg.curb_sample_step;
      const Point2 c = road.centre(s);
      const Point2 nr = right_normal(road.heading(s));
      const double off = side * 0.5 * road.width;
      line.push_back({c.x + off * nr.x, c.z + off * nr.z});
    }
    scene.curbs.push_back(std::move(line));
  }

  double total_weight = 0.0;
  for (const auto& sh : kShapes) total_weight += sh.weight;
  const int n_obstacles = std::uniform_int_distribution<int>(0, cfg.max_obstacles)(rng);

  struct Placed {
    double s, lat_lo, lat_hi, half_len;
  };
  std::vector<Placed> placed;
  for (int i = 0; i < n_obstacles; ++i) {
    for (int attempt = 0; attempt < 20; ++attempt) {
      double pick = unit(rng) * total_weight;
      const ObstacleShape* shape = &kShapes[0];
      for (const auto& sh : kShapes) {
        shape = &sh;
        if (pick < sh.weight) break;
        pick -= sh.weight;
      }
      const double side = unit(rng) < 0.5 ? -1.0 : 1.0;
      const bool on_road = unit(rng) < 0.8;
      const double gap = uniform(kGapMin + kGapMargin, kGapMax - kGapMargin - shape->width);
      const double s = uniform(cfg.obstacle_s_min, cfg.obstacle_s_max);
      const double half = 0.5 * road.width;
      const double lat = on_road ? side * (half - gap - 0.5 * shape->width) : side * (half + gap + 0.5 * shape->width);
      const Placed p{s, lat - 0.5 * shape->width, lat + 0.5 * shape->width, 0.5 * shape->length};
      const bool clash = std::any_of(placed.begin(), placed.end(), [&](const Placed& q) {
        return std::abs(q.s - p.s) < q.half_len + p.half_len + 0.5 && q.lat_lo < p.lat_hi + 0.3 &&
               p.lat_lo < q.lat_hi + 0.3;
      });
      if (clash) continue;
      placed.push_back(p);

      Obstacle ob;
      ob.kind = shape->kind;
      const Point2 c = road.centre(s);
      const Point2 nr = right_normal(road.heading(s));
      ob.cx = c.x + lat * nr.x;
      ob.cz = c.z + lat * nr.z;
      ob.yaw = road.heading(s);
      ob.length = shape->length;
      ob.width = shape->width;
      ob.height = shape->height;
      ob.base_y = on_road ? 0.0 : road.curb_height;
      scene.obstacles.push_back(ob);
      break;
    }
  }
  return scene;
}

std::string scene_to_json(const SceneSpec& scene) {
  json j;
  j["seed"] = scene.seed;
  j["road"] = {{"curvature", scene.road.curvature},
               {"width", scene.road.width},
               {"curb_height", scene.road.curb_height},
               {"s_begin", scene.road.s_begin},
               {"s_end", scene.road.s_end}};
  json curbs = json::array();
  for (const auto& line : scene.curbs) {
    json pts = json::array();
    for (const auto& p : line) pts.push_back({p.x, p.z});
    curbs.push_back(std::move(pts));
  }
  j["curbs"] = std::move(curbs);
  json obs = json::array();
  for (const auto& o : scene.obstacles) {
    obs.push_back({{"kind", kind_name(o.kind)},
                   {"cx", o.cx},
                   {"cz", o.cz},
                   {"yaw", o.yaw},
                   {"length", o.length},
                   {"width", o.width},
                   {"height", o.height},
                   {"base_y", o.base_y}});
  }
  j["obstacles"] = std::move(obs);
  return j.dump(1);
}

SceneSpec scene_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    SceneSpec scene;
    scene.seed = j.at("seed").get<std::uint64_t>();
    const json& r = j.at("road");
    scene.road.curvature = r.at("curvature").get<double>();
    scene.road.width = r.at("width").get<double>();
    scene.road.curb_height = r.at("curb_height").get<double>();
    scene.road.s_begin = r.at("s_begin").get<double>();
    scene.road.s_end = r.at("s_end").get<double>();
    for (const auto& line : j.at("curbs")) {
      Polyline pl;
      for (const auto& p : line) pl.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      scene.curbs.push_back(std::move(pl));
    }
    for (const auto& o : j.at("obstacles")) {
      Obstacle ob;
      ob.kind = kind_from_name(o.at("kind").get<std::string>());
      ob.cx = o.at("cx").get<double>();
      ob.cz = o.at("cz").get<double>();
      ob.yaw = o.at("yaw").get<double>();
      ob.length = o.at("length").get<double>();
      ob.width = o.at("width").get<double>();
      ob.height = o.at("height").get<double>();
      ob.base_y = o.at("base_y").get<double>();
      scene.obstacles.push_back(ob);
    }
    return scene;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad scene JSON: ") + e.what());
  }
}

void BeamConfig::validate() const {
  if (rings < 1) throw ConfigError("rings must be >= 1");
  if (!(elevation_max_deg >= elevation_min_deg)) throw ConfigError("elevation range is inverted");
  if (!(azimuth_step_deg > 0.0)) throw ConfigError("azimuth step must be positive");
  if (!(max_range > 0.0)) throw ConfigError("max range must be positive");
  if (!(range_noise_sigma >= 0.0) || !(intensity_noise >= 0.0)) throw ConfigError("noise must be >= 0");
  if (!(sensor_height > 0.0)) throw ConfigError("sensor height must be positive");
}

std::optional<RayHit> cast_ray(const SceneSpec& scene, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                               double max_range) {
  std::optional<RayHit> best;
  const RoadSpec& road = scene.road;
  if (dir.y() < 0.0 && origin.y() > road.curb_height) {
    const double t_top = (road.curb_height - origin.y()) / dir.y();
    const double t_road = -origin.y() / dir.y();
    const Eigen::Vector3d p_top = origin + t_top * dir;
    if (road.on_sidewalk(p_top.x(), p_top.z())) {
      best = RayHit{t_top, Material::Curb};
    } else if (auto t_face = first_curb_crossing(road, origin, dir, t_top, t_road)) {
      best = RayHit{*t_face, Material::Curb};
    } else {
      best = RayHit{t_road, Material::Road};
    }
  }
  for (const Obstacle& ob : scene.obstacles) {
    if (auto t = hit_box(ob, origin, dir); t && (!best || *t < best->range)) best = RayHit{*t, Material::Obstacle};
  }
  if (best && best->range > max_range) return std::nullopt;
  return best;
}

Transform sensor_pose_at(const RoadSpec& road, double s, double sensor_height) {
  const Point2 c = road.centre(s);
  return Transform::from_yaw(road.heading(s), Eigen::Vector3d(c.x, sensor_height, c.z));
}

LidarScan simulate_scan(const SceneSpec& scene, const Transform& sensor_pose, const BeamConfig& beams,
                        std::uint64_t seed, Micros timestamp) {
  beams.validate();
  LidarScan scan;
  scan.timestamp = timestamp;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const int n_az = static_cast<int>(std::lround(360.0 / beams.azimuth_step_deg));
  const double elev_step = beams.rings > 1 ? (beams.elevation_max_deg - beams.elevation_min_deg) / (beams.rings - 1) : 0.0;
  scan.points.reserve(static_cast<std::size_t>(beams.rings) * n_az / 2);
  for (int ring = 0; ring < beams.rings; ++ring) {
    const double e = (beams.elevation_min_deg + ring * elev_step) * kDeg;
    for (int k = 0; k < n_az; ++k) {
      const double a = k * beams.azimuth_step_deg * kDeg;
      const Eigen::Vector3d dir_s(std::cos(e) * std::sin(a), std::sin(e), std::cos(e) * std::cos(a));
      const Eigen::Vector3d dir_w = sensor_pose.rotation * dir_s;
      const auto hit = cast_ray(scene, sensor_pose.translation, dir_w, beams.max_range);
      if (!hit) continue;
      const double range = hit->range + beams.range_noise_sigma * gauss(rng);
      const double intensity =
          std::clamp(material_intensity(hit->material) + beams.intensity_noise * jitter(rng), 0.0, 1.0);
      const Eigen::Vector3d p = dir_s * range;
      scan.points.push_back({static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z()),
                             static_cast<float>(intensity)});
    }
  }
  return scan;
}

std::vector<std::vector<Point2>> footprints_in_sensor(const SceneSpec& scene, const Transform& sensor_pose) {
  const Transform inv = invert(sensor_pose);
  std::vector<std::vector<Point2>> out;
  for (const Obstacle& ob : scene.obstacles) {
    std::vector<Point2> fp;
    for (const Point2& p : ob.footprint()) {
      const Eigen::Vector3d q = inv.apply(Eigen::Vector3d(p.x, ob.base_y, p.z));
      fp.push_back({q.x(), q.z()});
    }
    out.push_back(std::move(fp));
  }
  return out;
}

LabelSet ground_truth_labels(const SceneSpec& scene, const Transform& sensor_pose, const GridSpec& grid) {
  grid.validate();
  const Transform inv = invert(sensor_pose);
  std::vector<Polyline> local;
  for (const Polyline& line : scene.curbs) {
    Polyline pl;
    pl.reserve(line.size());
    for (const Point2& p : line) {
      const Eigen::Vector3d q = inv.apply(Eigen::Vector3d(p.x, 0.0, p.z));
      pl.push_back({q.x(), q.z()});
    }
    local.push_back(std::move(pl));
  }
  LabelSet out;
  out.curb = rasterize_polylines(local, grid, 1);
  out.visible = CurbMask(grid);
  out.occluded = CurbMask(grid);
  const auto footprints = footprints_in_sensor(scene, sensor_pose);
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      if (out.curb.at(r, c) < 0.5f) continue;
      const double x = grid.x_of(c);
      const double z = grid.z_of(r);
      const bool hidden = std::any_of(footprints.begin(), footprints.end(),
                                      [&](const auto& fp) { return segment_hits_polygon(x, z, fp); });
      (hidden ? out.occluded : out.visible).at(r, c) = 1.0f;
    }
  }
  return out;
}

Sequence generate_sequence(const SceneSpec& scene, const SequenceConfig& cfg, std::uint64_t seed) {
  if (!(cfg.scan_rate > 0.0) || !(cfg.pose_rate > 0.0)) throw ConfigError("rates must be positive");
  if (cfg.n_frames < 1) throw ConfigError("n_frames must be >= 1");
  if (!(cfg.speed >= 0.0)) throw ConfigError("speed must be >= 0");
  cfg.grid.validate();
  cfg.beams.validate();

  const Micros scan_period = std::llround(1e6 / cfg.scan_rate);
  const Micros pose_period = std::llround(1e6 / cfg.pose_rate);
  // Offset the scan clock so that no scan lands on a pose knot.
  Micros offset = pose_period / 2;
  auto coincides = [&](Micros off) {
    for (int k = 0; k < cfg.n_frames; ++k) {
      if ((off + k * scan_period) % pose_period == 0) return true;
    }
    return false;
  };
  while (coincides(offset)) ++offset;

  auto arc_at = [&](Micros t) { return cfg.s_start + cfg.speed * static_cast<double>(t) * 1e-6; };
  const double h = cfg.beams.sensor_height;

  Sequence seq;
  seq.scene = scene;
  seq.config = cfg;
  seq.seed = seed;

  const Micros last_scan = offset + (cfg.n_frames - 1) * scan_period;
  std::vector<TimedPose> knots;
  for (Micros t = 0;; t += pose_period) {
    knots.push_back({t, sensor_pose_at(scene.road, arc_at(t), h)});
    if (t > last_scan) break;
  }
  seq.trajectory = Trajectory(std::move(knots));

  for (int k = 0; k < cfg.n_frames; ++k) {
    const Micros t = offset + k * scan_period;
    const Transform pose = sensor_pose_at(scene.road, arc_at(t), h);
    seq.scans.push_back(simulate_scan(scene, pose, cfg.beams, derive_seed(seed, static_cast<std::uint64_t>(k)), t));
    seq.labels.push_back(ground_truth_labels(scene, pose, cfg.grid));
  }
  return seq;
}

void write_sequence(const std::filesystem::path& dir, const Sequence& seq) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "scans");
  fs::create_directories(dir / "labels");
  for (std::size_t i = 0; i < seq.scans.size(); ++i) write_scan(dir / "scans" / (frame_name(i) + ".lcrb"), seq.scans[i]);
  for (std::size_t i = 0; i < seq.labels.size(); ++i) {
    const std::string stem = frame_name(i);
    write_pgm(dir / "labels" / (stem + ".curb.pgm"), seq.labels[i].curb);
    write_pgm(dir / "labels" / (stem + ".visible.pgm"), seq.labels[i].visible);
    write_pgm(dir / "labels" / (stem + ".occluded.pgm"), seq.labels[i].occluded);
  }
  write_pose_file(dir / "poses.jsonl", seq.trajectory);
  {
    std::ofstream os(dir / "scene.json", std::ios::binary);
    os << scene_to_json(seq.scene) << '\n';
  }
  const SequenceConfig& c = seq.config;
  json meta;
  meta["seed"] = seq.seed;
  meta["n_frames"] = c.n_frames;
  meta["speed"] = c.speed;
  meta["scan_rate"] = c.scan_rate;
  meta["pose_rate"] = c.pose_rate;
  meta["s_start"] = c.s_start;
  meta["grid"] = grid_to_json(c.grid);
  meta["beams"] = {{"rings", c.beams.rings},
                   {"elevation_min_deg", c.beams.elevation_min_deg},
                   {"elevation_max_deg", c.beams.elevation_max_deg},
                   {"azimuth_step_deg", c.beams.azimuth_step_deg},
                   {"max_range", c.beams.max_range},
                   {"range_noise_sigma", c.beams.range_noise_sigma},
                   {"intensity_noise", c.beams.intensity_noise},
                   {"sensor_height", c.beams.sensor_height}};
  json stamps = json::array();
  for (const auto& s : seq.scans) stamps.push_back(s.timestamp);
  meta["timestamps"] = std::move(stamps);
  std::ofstream os(dir / "meta.json", std::ios::binary);
  os << meta.dump(2) << '\n';
  if (!os) throw Error("failed to write " + (dir / "meta.json").string());
}

Sequence read_sequence(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::ifstream is(dir / "meta.json", std::ios::binary);
  if (!is) throw Error("missing " + (dir / "meta.json").string());
  Sequence seq;
  try {
    const json meta = json::parse(is);
    SequenceConfig& c = seq.config;
    seq.seed = meta.at("seed").get<std::uint64_t>();
    c.n_frames = meta.at("n_frames").get<int>();
    c.speed = meta.at("speed").get<double>();
    c.scan_rate = meta.at("scan_rate").get<double>();
    c.pose_rate = meta.at("pose_rate").get<double>();
    c.s_start = meta.at("s_start").get<double>();
    c.grid = grid_from_json(meta.at("grid"));
    const json& b = meta.at("beams");
    c.beams.rings = b.at("rings").get<int>();
    c.beams.elevation_min_deg = b.at("elevation_min_deg").get<double>();
    c.beams.elevation_max_deg = b.at("elevation_max_deg").get<double>();
    c.beams.azimuth_step_deg = b.at("azimuth_step_deg").get<double>();
    c.beams.max_range = b.at("max_range").get<double>();
    c.beams.range_noise_sigma = b.at("range_noise_sigma").get<double>();
    c.beams.intensity_noise = b.at("intensity_noise").get<double>();
    c.beams.sensor_height = b.at("sensor_height").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad meta.json: ") + e.what());
  }
  for (int i = 0; i < seq.config.n_frames; ++i) {
    const std::string stem = frame_name(static_cast<std::size_t>(i));
    seq.scans.push_back(read_scan(dir / "scans" / (stem + ".lcrb")));
    const fs::path curb = dir / "labels" / (stem + ".curb.pgm");
    if (fs::exists(curb)) {
      const double res = seq.config.grid.resolution;
      seq.labels.push_back({read_pgm(curb, res), read_pgm(dir / "labels" / (stem + ".visible.pgm"), res),
                            read_pgm(dir / "labels" / (stem + ".occluded.pgm"), res)});
    }
  }
  seq.trajectory = read_pose_file(dir / "poses.jsonl");
  if (fs::exists(dir / "scene.json")) {
    std::ifstream ss(dir / "scene.json", std::ios::binary);
    std::stringstream buf;
    buf << ss.rdbuf();
    seq.scene = scene_from_json(buf.str());
  }
  return seq;
}

AugmentParams draw_augment(std::uint64_t seed, const AugmentConfig& cfg) {
  std::mt19937_64 rng(derive_seed(seed, 0xA06));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AugmentParams p;
  p.mirror = unit(rng) < 0.5;
  p.shift_col = std::uniform_int_distribution<int>(-cfg.max_shift_px, cfg.max_shift_px)(rng);
  p.shift_row = std::uniform_int_distribution<int>(-cfg.max_shift_px, cfg.max_shift_px)(rng);
  p.rotate_deg = (2.0 * unit(rng) - 1.0) * cfg.max_rotate_deg;
  return p;
}

void apply_augment(const AugmentParams& p, BevImage& bev, std::vector<CurbMask*> masks) {
  for (const CurbMask* m : masks) {
    if (!(m->grid == bev.grid)) throw GridMismatch("augment: mask grid differs from the BEV grid");
  }
  if (p.is_identity()) return;
  const int w = bev.grid.width;
  const int h = bev.grid.height;
  const double rc = 0.5 * (h - 1);
  const double cc = 0.5 * (w - 1);
  const double th = p.rotate_deg * kDeg;
  const double cs = std::cos(th);
  const double sn = std::sin(th);
  // Source index for every destination pixel, -1 when it falls outside.
  std::vector<std::int64_t> src(static_cast<std::size_t>(w) * h, -1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double rr = r - p.shift_row - rc;
      const double cr = c - p.shift_col - cc;
      long sr = r - p.shift_row;
      long sc = c - p.shift_col;
      if (p.rotate_deg != 0.0) {
        sr = std::lround(rc + cs * rr - sn * cr);
        sc = std::lround(cc + sn * rr + cs * cr);
      }
      if (p.mirror) sc = w - 1 - sc;
      if (sr < 0 || sc < 0 || sr >= h || sc >= w) continue;
      src[static_cast<std::size_t>(r) * w + c] = sr * w + sc;
    }
  }
  auto remap = [&](float* plane) {
    std::vector<float> out(src.size(), 0.0f);
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (src[i] >= 0) out[i] = plane[src[i]];
    }
    std::copy(out.begin(), out.end(), plane);
  };
  for (int ch = 0; ch < BevImage::kChannels; ++ch) remap(bev.data.data() + static_cast<std::size_t>(ch) * w * h);
  for (CurbMask* m : masks) remap(m->values.data());
}

void augment(BevImage& bev, std::vector<CurbMask*> masks, std::uint64_t seed, const AugmentConfig& cfg) {
  apply_augment(draw_augment(seed, cfg), bev, std::move(masks));
}

}  // namespace curb
