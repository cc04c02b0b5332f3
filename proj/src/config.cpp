#include "curb/config.hpp"

#include <fstream>
#include <set>

#include "curb/errors.hpp"

namespace curb {
namespace {

using json = nlohmann::json;

// Reads fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }

  /// Nested object, or an empty object when absent.
  Section child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, name_.empty() ? key : name_ + "." + key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown key '" + item.key() + "' in " + (name_.empty() ? "config" : "section '" + name_ + "'"));
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_grid(Section s, GridSpec& g) {
  s.get("width", g.width);
  s.get("height", g.height);
  s.get("resolution", g.resolution);
  s.finish();
}

json grid_json(const GridSpec& g) { return {{"width", g.width}, {"height", g.height}, {"resolution", g.resolution}}; }

void read_train(Section s, TrainConfig& t) {
  std::string opt = t.optimizer.kind == nn::OptimizerConfig::Kind::Adam ? "adam" : "sgd";
  s.get("epochs", t.epochs);
  s.get("lr", t.lr);
  s.get("optimizer", opt);
  s.get("momentum", t.optimizer.momentum);
  s.get("beta1", t.optimizer.beta1);
  s.get("beta2", t.optimizer.beta2);
  s.get("weight_decay", t.optimizer.weight_decay);
  s.get("batch", t.batch);
  s.get("crop_width", t.crop_width);
  s.get("crop_height", t.crop_height);
  s.get("augment", t.augment);
  s.get("time_budget_s", t.time_budget_s);
  s.finish();
  if (opt == "sgd") {
    t.optimizer.kind = nn::OptimizerConfig::Kind::Sgd;
  } else if (opt == "adam") {
    t.optimizer.kind = nn::OptimizerConfig::Kind::Adam;
  } else {
    throw ConfigError("optimizer must be 'sgd' or 'adam'");
  }
}

json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"lr", t.lr},
          {"optimizer", t.optimizer.kind == nn::OptimizerConfig::Kind::Adam ? "adam" : "sgd"},
          {"momentum", t.optimizer.momentum},
          {"beta1", t.optimizer.beta1},
          {"beta2", t.optimizer.beta2},
          {"weight_decay", t.optimizer.weight_decay},
          {"batch", t.batch},
          {"crop_width", t.crop_width},
          {"crop_height", t.crop_height},
          {"augment", t.augment},
          {"time_budget_s", t.time_budget_s}};
}

}  // namespace

PipelineConfig::PipelineConfig() {
  train_visible.epochs = 10;
  train_visible.lr = 0.01;
  train_occluded.epochs = 60;
  train_occluded.lr = 0.001;
  train_occluded.optimizer.kind = nn::OptimizerConfig::Kind::Adam;
}

void PipelineConfig::propagate() {
  sequence.grid = grid;
  sequence.beams = beams;
  dataset.beams = beams;
  dataset.trim = trim;
  dataset.window = window;
  dataset.scene = scene;
  models.occluded.cell_sizes = anchors.cell_sizes;
  train_visible.seed = seed;
  train_occluded.seed = seed;
  train_occluded.alpha = loss.alpha;
}

void PipelineConfig::validate() const {
  trim.validate();
  grid.validate();
  obstacle_band.validate();
  dataset.grid.validate();
  anchors.validate();
  loss.validate();
  postprocess.validate();
  beams.validate();
  train_visible.validate();
  train_occluded.validate();
  if (window < 1) throw ConfigError("window must be >= 1");
  if (models.visible.base_channels < 1 || models.occluded.base_channels < 1 || models.occluded.feature_channels < 1) {
    throw ConfigError("channel counts must be >= 1");
  }
  if (models.occluded.cell_sizes != anchors.cell_sizes) throw ConfigError("model scales must match anchor scales");
  for (std::size_t i = 0; i < anchors.cell_sizes.size(); ++i) {
    const int s = anchors.cell_sizes[i];
    if ((s & (s - 1)) != 0) throw ConfigError("anchor cell sizes must be powers of two");
    if (i > 0 && s <= anchors.cell_sizes[i - 1]) throw ConfigError("anchor cell sizes must increase");
  }
  if (grid.width % 8 != 0 || grid.height % 8 != 0) throw ConfigError("grid width and height must be multiples of 8");
  if (dataset.grid.width % 8 != 0 || dataset.grid.height % 8 != 0) {
    throw ConfigError("dataset grid width and height must be multiples of 8");
  }
  if (!(infer.visible_threshold > 0.0f && infer.visible_threshold < 1.0f) ||
      !(infer.presence_threshold > 0.0f && infer.presence_threshold < 1.0f)) {
    throw ConfigError("inference thresholds must lie in (0, 1)");
  }
  if (sequence.n_frames < 1 || !(sequence.scan_rate > 0.0) || !(sequence.pose_rate > 0.0) || !(sequence.speed >= 0.0)) {
    throw ConfigError("sequence needs n_frames >= 1, positive rates and non-negative speed");
  }
  if (dataset.frames < 1) throw ConfigError("dataset.frames must be >= 1");
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  Section root(j, "");
  root.get("seed", c.seed);
  root.get("window", c.window);
  {
    Section s = root.child("trim");
    s.get("max_below", c.trim.max_below);
    s.get("max_x_abs", c.trim.max_x_abs);
    s.get("max_z_abs", c.trim.max_z_abs);
    s.finish();
  }
  read_grid(root.child("grid"), c.grid);
  {
    Section s = root.child("obstacle_band");
    s.get("lo", c.obstacle_band.lo);
    s.get("hi", c.obstacle_band.hi);
    s.finish();
  }
  {
    Section s = root.child("anchors");
    s.get("cell_sizes", c.anchors.cell_sizes);
    s.get("fit_margin", c.anchors.fit_margin);
    s.finish();
  }
  {
    Section s = root.child("loss");
    s.get("alpha", c.loss.alpha);
    s.finish();
  }
  {
    Section s = root.child("postprocess");
    s.get("prob_threshold", c.postprocess.prob_threshold);
    s.get("dilation_radius_px", c.postprocess.dilation_radius_px);
    s.finish();
  }
  {
    Section s = root.child("beams");
    s.get("rings", c.beams.rings);
    s.get("elevation_min_deg", c.beams.elevation_min_deg);
    s.get("elevation_max_deg", c.beams.elevation_max_deg);
    s.get("azimuth_step_deg", c.beams.azimuth_step_deg);
    s.get("max_range", c.beams.max_range);
    s.get("range_noise_sigma", c.beams.range_noise_sigma);
    s.get("intensity_noise", c.beams.intensity_noise);
    s.get("sensor_height", c.beams.sensor_height);
    s.finish();
  }
  {
    Section s = root.child("scene");
    s.get("max_obstacles", c.scene.max_obstacles);
    s.get("obstacle_s_min", c.scene.obstacle_s_min);
    s.get("obstacle_s_max", c.scene.obstacle_s_max);
    s.get("straight_probability", c.scene.straight_probability);
    s.get("min_radius", c.scene.min_radius);
    s.get("max_radius", c.scene.max_radius);
    s.get("min_width", c.scene.min_width);
    s.get("max_width", c.scene.max_width);
    s.get("curb_sample_step", c.scene.curb_sample_step);
    s.finish();
  }
  {
    Section s = root.child("sequence");
    s.get("n_frames", c.sequence.n_frames);
    s.get("speed", c.sequence.speed);
    s.get("scan_rate", c.sequence.scan_rate);
    s.get("pose_rate", c.sequence.pose_rate);
    s.get("s_start", c.sequence.s_start);
    s.finish();
  }
  {
    Section s = root.child("dataset");
    s.get("frames", c.dataset.frames);
    read_grid(s.child("grid"), c.dataset.grid);
    s.get("min_speed", c.dataset.min_speed);
    s.get("max_speed", c.dataset.max_speed);
    s.get("min_station", c.dataset.min_station);
    s.get("max_station", c.dataset.max_station);
    s.finish();
  }
  {
    Section s = root.child("models");
    s.get("visible_base_channels", c.models.visible.base_channels);
    s.get("occluded_base_channels", c.models.occluded.base_channels);
    s.get("feature_channels", c.models.occluded.feature_channels);
    s.get("intra_layer", c.models.occluded.intra_layer);
    s.get("intra_kernel", c.models.occluded.intra_kernel);
    s.finish();
  }
  read_train(root.child("train_visible"), c.train_visible);
  read_train(root.child("train_occluded"), c.train_occluded);
  {
    Section s = root.child("infer");
    s.get("visible_threshold", c.infer.visible_threshold);
    s.get("presence_threshold", c.infer.presence_threshold);
    s.finish();
  }
  root.finish();
  c.propagate();
  c.validate();
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["window"] = c.window;
  j["trim"] = {{"max_below", c.trim.max_below}, {"max_x_abs", c.trim.max_x_abs}, {"max_z_abs", c.trim.max_z_abs}};
  j["grid"] = grid_json(c.grid);
  j["obstacle_band"] = {{"lo", c.obstacle_band.lo}, {"hi", c.obstacle_band.hi}};
  j["anchors"] = {{"cell_sizes", c.anchors.cell_sizes}, {"fit_margin", c.anchors.fit_margin}};
  j["loss"] = {{"alpha", c.loss.alpha}};
  j["postprocess"] = {{"prob_threshold", c.postprocess.prob_threshold},
                      {"dilation_radius_px", c.postprocess.dilation_radius_px}};
  j["beams"] = {{"rings", c.beams.rings},
                {"elevation_min_deg", c.beams.elevation_min_deg},
                {"elevation_max_deg", c.beams.elevation_max_deg},
                {"azimuth_step_deg", c.beams.azimuth_step_deg},
                {"max_range", c.beams.max_range},
                {"range_noise_sigma", c.beams.range_noise_sigma},
                {"intensity_noise", c.beams.intensity_noise},
                {"sensor_height", c.beams.sensor_height}};
  j["scene"] = {{"max_obstacles", c.scene.max_obstacles},
                {"obstacle_s_min", c.scene.obstacle_s_min},
                {"obstacle_s_max", c.scene.obstacle_s_max},
                {"straight_probability", c.scene.straight_probability},
                {"min_radius", c.scene.min_radius},
                {"max_radius", c.scene.max_radius},
                {"min_width", c.scene.min_width},
                {"max_width", c.scene.max_width},
                {"curb_sample_step", c.scene.curb_sample_step}};
  j["sequence"] = {{"n_frames", c.sequence.n_frames},
                   {"speed", c.sequence.speed},
                   {"scan_rate", c.sequence.scan_rate},
                   {"pose_rate", c.sequence.pose_rate},
                   {"s_start", c.sequence.s_start}};
  j["dataset"] = {{"frames", c.dataset.frames},
                  {"grid", grid_json(c.dataset.grid)},
                  {"min_speed", c.dataset.min_speed},
                  {"max_speed", c.dataset.max_speed},
                  {"min_station", c.dataset.min_station},
                  {"max_station", c.dataset.max_station}};
  j["models"] = {{"visible_base_channels", c.models.visible.base_channels},
                 {"occluded_base_channels", c.models.occluded.base_channels},
                 {"feature_channels", c.models.occluded.feature_channels},
                 {"intra_layer", c.models.occluded.intra_layer},
                 {"intra_kernel", c.models.occluded.intra_kernel}};
  j["train_visible"] = train_json(c.train_visible);
  j["train_occluded"] = train_json(c.train_occluded);
  j["infer"] = {{"visible_threshold", c.infer.visible_threshold}, {"presence_threshold", c.infer.presence_threshold}};
  return j;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

}  // namespace curb
