#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "curb/anchor_codec.hpp"
#include "curb/bev.hpp"
#include "curb/nn/loss.hpp"
#include "curb/nn/models.hpp"
#include "curb/pipeline.hpp"
#include "curb/pointcloud.hpp"
#include "curb/postprocess.hpp"
#include "curb/synth.hpp"
#include "curb/visibility.hpp"

namespace curb {

struct ModelConfig {
  nn::VisibleNet<float>::Config visible;
  nn::OccludedNet<float>::Config occluded;
};

/// Everything a pipeline run depends on. Every section is optional in JSON;
/// missing keys keep their defaults and unknown keys are rejected.
struct PipelineConfig {
  std::uint64_t seed = 0;
  TrimConfig trim;
  GridSpec grid;
  std::size_t window = 5;
  HeightBand obstacle_band;
  AnchorSpec anchors;
  nn::LossConfig loss;
  PostprocessConfig postprocess;
  BeamConfig beams;
  SceneConfig scene;
  SequenceConfig sequence;  // grid and beams are taken from the sections above
  DatasetConfig dataset;    // beams and trim are taken from the sections above
  ModelConfig models;
  TrainConfig train_visible;
  TrainConfig train_occluded;
  InferConfig infer;

  PipelineConfig();

  /// Cross-section checks; throws ConfigError.
  void validate() const;
  /// Applies the shared sections (grid, beams, trim, window, alpha) to the
  /// nested configs that carry their own copies.
  void propagate();
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace curb
