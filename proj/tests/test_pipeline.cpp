#include <gtest/gtest.h>

#include "curb/errors.hpp"
#include "curb/pipeline.hpp"
#include "curb/visibility.hpp"

namespace curb {
namespace {

DatasetConfig small_dataset() {
  DatasetConfig dc;
  dc.frames = 3;
  dc.grid.width = 64;
  dc.grid.height = 128;
  return dc;
}

TEST(BuildBev, MatchesTheStagesRunByHand) {
  const SceneSpec scene = generate_scene(4);
  SequenceConfig sc;
  sc.n_frames = 6;
  const Sequence seq = generate_sequence(scene, sc, 5);
  const Micros t = seq.scans[4].timestamp;
  GridSpec g;
  g.width = 96;
  g.height = 160;
  std::vector<LidarScan> trimmed;
  for (std::size_t k : select_window(seq.scans, t, 3)) trimmed.push_back(trim_scan(seq.scans[k]));
  const BevImage manual = rasterize_cloud(integrate_scans(trimmed, seq.trajectory, t), g);
  const BevImage built = build_bev(seq.scans, seq.trajectory, t, g, {}, 3);
  EXPECT_EQ(built.data, manual.data);
  EXPECT_THROW(build_bev(seq.scans, seq.trajectory, seq.scans.front().timestamp - 1, g), OutOfRange);
}

TEST(Dataset, FramesAreDeterministicAndIndependent) {
  const DatasetConfig dc = small_dataset();
  const auto all = make_dataset(dc, 11);
  ASSERT_EQ(all.size(), 3u);
  const FrameSample again = make_frame(dc, 11, 2);
  EXPECT_EQ(again.bev.data, all[2].bev.data);
  EXPECT_EQ(again.curb, all[2].curb);
  EXPECT_NE(all[0].bev.data, all[1].bev.data);
}

TEST(Dataset, LabelsPartitionTheCurb) {
  for (const auto& f : make_dataset(small_dataset(), 12)) {
    EXPECT_EQ(count_on(mask_intersection(f.visible, f.occluded)), 0u);
    EXPECT_EQ(mask_union(f.visible, f.occluded), f.curb);
    EXPECT_EQ(f.bev.grid, f.curb.grid);
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig t;
  EXPECT_NO_THROW(t.validate());
  t.crop_width = 12;
  EXPECT_THROW(t.validate(), ConfigError);
  t = {};
  t.batch = 0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = {};
  t.lr = -1.0;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(Training, OneEpochOnTinyDataIsDeterministic) {
  const auto data = make_dataset(small_dataset(), 13);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch = 2;
  nn::VisibleNet<float> a({4}, 1), b({4}, 1);
  const auto la = train_visible(a, data, tc);
  const auto lb = train_visible(b, data, tc);
  ASSERT_EQ(la.size(), 1u);
  EXPECT_EQ(la[0].mean_loss, lb[0].mean_loss);
  for (std::size_t p = 0; p < a.parameters().tensors.size(); ++p) {
    EXPECT_EQ(a.parameters().tensors[p].data(), b.parameters().tensors[p].data());
  }
  EXPECT_THROW(train_visible(a, std::span<const FrameSample>(), tc), ConfigError);
}

TEST(Training, OccludedScalesMustMatchAnchors) {
  const auto data = make_dataset(small_dataset(), 14);
  nn::OccludedNet<float>::Config cfg;
  cfg.cell_sizes = {8, 16};
  nn::OccludedNet<float> net(cfg, 2);
  TrainConfig tc;
  tc.epochs = 1;
  EXPECT_THROW(train_occluded(net, data, tc, AnchorSpec{}), ConfigError);
  AnchorSpec spec;
  spec.cell_sizes = {8, 16};
  EXPECT_NO_THROW(train_occluded(net, data, tc, spec));
}

TEST(Inference, ZeroModelsGiveTheDocumentedDegenerateOutput) {
  const FrameSample f = make_frame(small_dataset(), 15, 0);
  nn::VisibleNet<float> vis({4}, 3);
  nn::OccludedNet<float> occ({}, 4);
  vis.zero_head();
  occ.zero_head();
  const Inference r = infer_bev(vis, occ, f.bev);
  for (float v : r.visible_prob.values) EXPECT_FLOAT_EQ(v, 0.5f);
  // Presence 0.5 meets the decode threshold, so every cell draws a line.
  EXPECT_GT(count_on(r.occluded), 0u);
  EXPECT_EQ(r.combined, mask_max(r.visible_prob, r.occluded));
  const Inference again = infer_bev(vis, occ, f.bev);
  EXPECT_EQ(again.combined, r.combined);
  EXPECT_EQ(again.occluded, r.occluded);
}

TEST(Inference, PredictedVisibleMasksAreBinary) {
  auto data = make_dataset(small_dataset(), 16);
  nn::VisibleNet<float> vis({4}, 5);
  use_predicted_visible(data, vis, 0.5f);
  for (const auto& f : data) {
    for (float v : f.visible.values) EXPECT_TRUE(v == 0.0f || v == 1.0f);
  }
}

}  // namespace
}  // namespace curb
