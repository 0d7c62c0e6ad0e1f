/* Copyright 2026 The ucp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ucp/error.hpp"
#include "ucp/fs_util.hpp"
#include "ucp/manifest.hpp"
#include "ucp/partitioner.hpp"
#include "ucp/reconfig.hpp"

namespace ucp {
namespace {

const std::filesystem::path kFixtures = UCP_FIXTURE_DIR;

// A [5] param under ZeRO-3 over two ranks: chunk 3, rank 1 holds [3, 6)
// with one padding element.
class GoldenManifest : public ::testing::Test {
 protected:
  void SetUp() override {
    spec_ = testing::single_param_model({5});
    partition(spec_, init_state(spec_, 1), ParallelConfig::parse("2,1,1,1,z3,seq"), dir_ / "ckpt");
  }
  ModelSpec spec_;
  testing::TempDir dir_;
};

TEST_F(GoldenManifest, RankManifestByteForByte) {
  const std::string text = read_text(dir_ / "ckpt" / "rank_1" / "shards.json");
  EXPECT_EQ(text, read_text(kFixtures / "golden_z3_rank1_shards.json"));
  const RankManifest m = parse_rank_manifest(text);
  ASSERT_EQ(m.shards.size(), 3u);
  EXPECT_EQ(m.shards[0].file, "w.weight.ucpt");
  EXPECT_EQ(m.shards[0].flat_range, (FlatRange{3, 6}));
  EXPECT_EQ(m.shards[0].padded_numel, 6u);
  EXPECT_EQ(m.shards[0].pad_elems, 1u);
  EXPECT_EQ(m.shards[0].pattern.data.kind, PatternKind::kShardV);
  EXPECT_EQ(rank_manifest_json(m), text);
}

TEST_F(GoldenManifest, ConfigByteForByte) {
  const std::string text = read_text(dir_ / "ckpt" / "config.json");
  EXPECT_EQ(text, read_text(kFixtures / "golden_z3_config.json"));
  const CheckpointMeta meta = parse_checkpoint_meta(text);
  EXPECT_EQ(meta.config, ParallelConfig::parse("2,1,1,1,z3,seq"));
  EXPECT_EQ(meta.metadata.at("loss_scale"), 65536.0);
  EXPECT_EQ(checkpoint_meta_json(meta), text);
}

TEST(Manifest, EntryJsonRoundTripsForEveryLayout) {
  const ModelSpec spec = make_model(ModelFamily::kGQA, {});
  for (const char* c : {"2,2,2,1,z1,seq", "4,1,1,1,z3,seq", "1,2,2,1,z0,int2", "1,4,1,1,z0,seq,rows2"}) {
    ModelSpec s = spec;
    if (std::string(c).find("rows") != std::string::npos) s = make_model(ModelFamily::kDenseGPT, {});
    for (const auto& e : plan_fragments(s, ParallelConfig::parse(c))) {
      // The rank lives in the enclosing manifest, not the entry.
      ShardEntry back = shard_entry_from_json(to_json(e));
      back.rank = e.rank;
      ASSERT_EQ(back, e) << c << " " << e.param;
    }
  }
}

TEST(Manifest, RejectsMalformedDocuments) {
  EXPECT_THROW(parse_checkpoint_meta("{"), Error);
  EXPECT_THROW(parse_checkpoint_meta("{\"format_version\": 2}"), Error);
  EXPECT_THROW(parse_rank_manifest("{\"format_version\": 1}"), Error);
  const ModelSpec spec = testing::single_param_model({4});
  auto e = plan_fragments(spec, ParallelConfig{}).front();
  auto j = to_json(e);
  j["file"] = "../escape.ucpt";
  EXPECT_THROW(shard_entry_from_json(j), Error);
}

TEST(ReadWorld, DetectsTamperedTrees) {
  const ModelSpec spec = testing::single_param_model({8});
  testing::TempDir dir;
  partition(spec, init_state(spec, 1), ParallelConfig::parse("2,1,1,1,z0,seq"), dir / "c");
  write_text_atomic(dir / "c" / "rank_0" / "stray.ucpt", "x");
  EXPECT_THROW(read_world(dir / "c"), Error);
  EXPECT_THROW(extract(dir / "c" / "rank_0"), Error);
  std::filesystem::remove(dir / "c" / "rank_0" / "stray.ucpt");
  EXPECT_NO_THROW(read_world(dir / "c"));
  std::filesystem::remove_all(dir / "c" / "rank_1");
  EXPECT_THROW(read_world(dir / "c"), Error);
}

TEST(Extract, EmptyRankDirIsManifestError) {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "rank_0");
  try {
    extract(dir / "rank_0");
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::kManifest || e.code() == ErrorCode::kIo);
  }
}

TEST(Extract, OneMessagePerFragment) {
  ModelSpec spec = testing::single_param_model({4});
  spec.params.push_back({"b", {6}, 0, ParamKind::kLayerNormBias, std::nullopt, {}});
  spec.params.push_back({"c", {2, 2}, 0, ParamKind::kLayerNormWeight, std::nullopt, {}});
  testing::TempDir dir;
  const ModelState s = init_state(spec, 1);
  partition(spec, s, ParallelConfig::parse("2,1,1,1,z1,seq"), dir / "c");
  const auto msgs = extract(dir / "c" / "rank_1");
  ASSERT_EQ(msgs.size(), 9u);
  for (const auto& m : msgs) {
    EXPECT_EQ(m.source_rank, 1u);
    if (m.entry.state == StateKind::kWeight) {
      EXPECT_EQ(m.entry.pattern.data.kind, PatternKind::kReplicate);
      EXPECT_FALSE(m.entry.flat_range.has_value());
      EXPECT_EQ(m.tensor, s.params.at(m.entry.param).weight);
    } else {
      EXPECT_EQ(m.entry.pattern.data.kind, PatternKind::kShardV);
      EXPECT_TRUE(m.entry.flat_range.has_value());
    }
  }
}

}  // namespace
}  // namespace ucp
