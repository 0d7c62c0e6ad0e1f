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
#include <algorithm>

#include "ucp/fs_util.hpp"
#include "ucp/oracle.hpp"
#include "ucp/partitioner.hpp"
#include "ucp/reconfig.hpp"
#include "ucp/verify.hpp"

namespace ucp {
namespace {

ParallelConfig cfg(const char* text) { return ParallelConfig::parse(text); }

TEST(Grid, DefaultShape) {
  const auto configs = default_grid_configs();
  EXPECT_EQ(configs.size(), 39u);
  for (const auto& c : configs) {
    if (c.zero == ZeroStage::kZ3) {
      EXPECT_EQ(c.tp, 1u);
      EXPECT_EQ(c.pp, 1u);
    }
  }
  const auto pairs = default_resume_pairs();
  EXPECT_EQ(pairs.size(), 6u);
  EXPECT_NE(std::find(pairs.begin(), pairs.end(),
                      ConfigPair{cfg("2,1,4,1,z1,seq"), cfg("2,2,2,1,z0,seq")}),
            pairs.end());
}

TEST(Oracle, InvertsPartitionOnEveryGridConfig) {
  for (const auto& m : default_grid_models()) {
    const ModelSpec spec = make_model(m.family, m.scale);
    const ModelState state = init_state(spec, 11);
    for (const auto& c : compatible_configs(spec, default_grid_configs())) {
      const auto diff = first_difference(state, consolidate_world(build_world(spec, state, c)));
      EXPECT_FALSE(diff) << model_family_name(m.family) << " " << c.to_string() << ": " << *diff;
    }
  }
}

TEST(Oracle, SingleRankIsACopy) {
  const ModelSpec spec = make_model(ModelFamily::kGQA, {});
  const ModelState state = init_state(spec, 1);
  const World w = build_world(spec, state, cfg("1,1,1,1,z0,seq"));
  for (const auto& f : w.ranks[0].fragments) {
    EXPECT_EQ(f.tensor, state.params.at(f.entry.param).get(f.entry.state));
  }
  testing::TempDir dir;
  save_world(w, dir / "ckpt");
  EXPECT_EQ(consolidate_oracle(dir / "ckpt"), state);
}

TEST(Oracle, RejectsADivergedReplica) {
  const ModelSpec spec = make_model(ModelFamily::kDenseGPT, {});
  World w = build_world(spec, init_state(spec, 1), cfg("2,1,1,1,z0,seq"));
  w.ranks[1].fragments[0].tensor.mutable_f32()[3] += 1.0f;
  EXPECT_THROW(consolidate_world(w), Error);
}

TEST(FirstDifference, NamesParamStateAndIndex) {
  const ModelSpec spec = testing::single_param_model({2, 3});
  const ModelState a = init_state(spec, 1);
  ModelState b = a;
  EXPECT_FALSE(first_difference(a, b));
  b.params.at("w").adam_m.mutable_f32()[4] = 0.5f;
  const auto diff = first_difference(a, b);
  ASSERT_TRUE(diff);
  EXPECT_EQ(diff->rfind("w/adam_m[1,1]: expected 0x", 0), 0u) << *diff;
  EXPECT_NE(diff->find("got 0x3f000000"), std::string::npos) << *diff;
}

TEST(FaultInjection, IsLocatedByConvert) {
  const ModelSpec spec = make_model(ModelFamily::kDenseGPT, {});
  testing::TempDir dir;
  partition(spec, init_state(spec, 1), cfg("2,2,1,1,z0,seq"), dir / "src");
  // rank 3 is tp 1, dp 1: its replica of tp 1's fragment goes bad.
  const auto path = inject_fault(dir / "src" / "rank_3", "layers.1.mlp.fc2.weight.adam_v.ucpt", 0);
  EXPECT_TRUE(std::filesystem::exists(path));
  try {
    convert(dir / "src", dir / "out");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kReplicaMismatch);
    const std::string what = e.what();
    EXPECT_NE(what.find("layers.1.mlp.fc2.weight"), std::string::npos) << what;
    EXPECT_NE(what.find("adam_v"), std::string::npos) << what;
    EXPECT_NE(what.find("rank 3"), std::string::npos) << what;
  }
}

TEST(VerifyRoundtrip, SmallGridPasses) {
  GridSpec grid;
  grid.models = {{ModelFamily::kMoE, {}}};
  grid.configs = {cfg("1,1,1,1,z0,seq"), cfg("2,2,1,1,z1,seq"), cfg("4,1,1,1,z3,seq"),
                  cfg("1,1,2,1,z0,int2")};
  grid.resume_pairs = {{cfg("2,1,2,1,z1,seq"), cfg("1,2,1,1,z0,seq")}};
  grid.trainer.steps = 3;
  testing::TempDir dir;
  const auto report = verify_roundtrip(grid, dir / "scratch");
  EXPECT_EQ(report.cells.size(), 17u);
  for (const auto& c : report.cells) EXPECT_TRUE(c.pass) << c.src << " -> " << c.tgt << ": " << c.detail;
  EXPECT_NE(report_json(report).find("\"cells\""), std::string::npos);

  std::filesystem::create_directories(dir / "busy" / "x");
  EXPECT_THROW(verify_roundtrip(grid, dir / "busy"), Error);
}

TEST(Bench, RowsCoverTheProductPlusBaseline) {
  BenchSpec spec;
  spec.model = {ModelFamily::kDenseGPT, {2, 32}};
  spec.source = cfg("2,2,1,1,z1,seq");
  spec.target = cfg("1,1,2,1,z0,seq");
  spec.workers = {1, 3};
  spec.inner = {1, 2};
  testing::TempDir dir;
  const auto report = bench(spec, dir / "scratch");
  ASSERT_EQ(report.rows.size(), 5u);
  EXPECT_EQ(report.rows[0].n_workers, 1u);
  EXPECT_EQ(report.rows[0].inner, 1u);
  for (const auto& r : report.rows) {
    EXPECT_TRUE(r.identical_to_sequential);
    EXPECT_GT(r.params_numel, 0u);
  }
  const std::string csv = bench_csv(report);
  EXPECT_EQ(csv.rfind("model,params_numel,n_workers,inner,wall_ms_convert,wall_ms_load,", 0), 0u)
      << csv;
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(SameTree, DetectsByteAndPathDifferences) {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "a" / "d");
  std::filesystem::create_directories(dir / "b" / "d");
  write_text_atomic(dir / "a" / "d" / "f", "xy");
  write_text_atomic(dir / "b" / "d" / "f", "xy");
  EXPECT_TRUE(same_tree(dir / "a", dir / "b"));
  write_text_atomic(dir / "b" / "d" / "f", "xz");
  EXPECT_FALSE(same_tree(dir / "a", dir / "b"));
  write_text_atomic(dir / "b" / "d" / "f", "xy");
  write_text_atomic(dir / "b" / "g", "");
  EXPECT_FALSE(same_tree(dir / "a", dir / "b"));
}

}  // namespace
}  // namespace ucp
