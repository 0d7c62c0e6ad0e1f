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

#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ucp/error.hpp"
#include "ucp/partitioner.hpp"
#include "ucp/pattern.hpp"
#include "ucp/shard.hpp"
#include "ucp/verify.hpp"

namespace ucp {
namespace {

ParallelConfig cfg(const char* text) { return ParallelConfig::parse(text); }

const StackedPattern& weight_pattern(const std::array<StackedPattern, 3>& p) { return p[0]; }

TEST(AssignPattern, TensorLevelRules) {
  const ModelSpec spec = make_model(ModelFamily::kDenseGPT, {});
  const auto tp2 = cfg("1,2,1,1,z0,seq");
  auto kind = [&](const char* name) {
    return weight_pattern(assign_pattern(spec, spec.param(name), tp2)).tensor.kind;
  };
  EXPECT_EQ(kind("layers.0.input_norm.weight"), PatternKind::kReplicate);
  EXPECT_EQ(kind("layers.0.input_norm.bias"), PatternKind::kReplicate);
  EXPECT_EQ(kind("layers.0.attn.qkv.weight"), PatternKind::kShardV);
  EXPECT_EQ(kind("layers.0.attn.out.weight"), PatternKind::kShardH);
  EXPECT_EQ(kind("layers.0.mlp.fc1.weight"), PatternKind::kShardV);
  EXPECT_EQ(kind("layers.0.mlp.fc2.weight"), PatternKind::kShardH);
  EXPECT_EQ(kind("layers.0.attn.alibi_slopes"), PatternKind::kPartial);
  EXPECT_EQ(kind("embed.weight"), PatternKind::kShardV);
  EXPECT_EQ(kind("head.weight"), PatternKind::kShardV);
  const auto hy = assign_pattern(spec, spec.param("layers.0.attn.out.weight"),
                                 cfg("1,4,1,1,z0,seq,rows2"));
  EXPECT_EQ(hy[0].tensor.kind, PatternKind::kShardHy);
  EXPECT_EQ(hy[0].tensor.grid_rows, 2u);
  EXPECT_EQ(hy[0].tensor.grid_cols, 2u);
}

TEST(AssignPattern, MoeExpertsAreShardNC) {
  ModelScale s;
  s.hidden = 16;
  s.expert_hidden = 32;
  const ModelSpec spec = make_model(ModelFamily::kMoE, s);
  const auto& p = spec.param("layers.0.moe.experts.fc1.weight");
  const auto pats = assign_pattern(spec, p, cfg("1,2,1,1,z0,seq"));
  EXPECT_EQ(pats[0].tensor.kind, PatternKind::kShardNC);
  EXPECT_EQ(pats[0].tensor.segments,
            (std::vector<Segment>{{0, 32}, {32, 32}, {64, 32}, {96, 32}}));
  // Each tp rank holds 16 rows of every expert block.
  for (const auto& e : plan_fragments(spec, cfg("1,2,1,1,z0,seq"))) {
    if (e.param == p.name) {
      EXPECT_EQ(e.shape, (Shape{64, 16}));
    }
  }
}

TEST(AssignPattern, DataAndPipelineLevels) {
  const ModelSpec spec = make_model(ModelFamily::kDenseGPT, {});
  const auto& ln = spec.param("layers.0.input_norm.weight");
  const auto z1 = assign_pattern(spec, ln, cfg("2,1,1,1,z1,seq"));
  EXPECT_EQ(z1[0].data.kind, PatternKind::kReplicate);
  EXPECT_EQ(z1[1].data.kind, PatternKind::kShardV);
  EXPECT_EQ(z1[2].data.kind, PatternKind::kShardV);
  const auto z3 = assign_pattern(spec, ln, cfg("2,1,1,1,z3,seq"));
  for (const auto& p : z3) EXPECT_EQ(p.data.kind, PatternKind::kShardV);
  const auto ones = assign_pattern(spec, ln, cfg("1,1,1,1,z0,seq"));
  EXPECT_EQ(ones[0].summary(), PatternKind::kUnique);
  // Tied embedding and head live on the first and last stage.
  const auto tied = assign_pattern(spec, spec.param("head.weight"), cfg("1,1,2,1,z0,seq"));
  EXPECT_EQ(tied[0].pipeline.kind, PatternKind::kReplicate);
  EXPECT_EQ(tied[0].stages, (std::vector<std::uint32_t>{0, 1}));
  const auto single = assign_pattern(spec, ln, cfg("1,1,2,1,z0,seq"));
  EXPECT_EQ(single[0].pipeline.kind, PatternKind::kUnique);
  EXPECT_EQ(single[0].stages, (std::vector<std::uint32_t>{0}));
}

TEST(AssignPattern, CoverageGapIsAnError) {
  ModelSpec spec = testing::single_param_model({6, 4}, ParamKind::kMatmul2D);
  spec.params[0].tp_axis_hint = 0;
  try {
    assign_pattern(spec, spec.params[0], cfg("1,4,1,1,z0,seq"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPatternCoverage);
  }
  spec.params[0].tp_axis_hint.reset();
  EXPECT_THROW(assign_pattern(spec, spec.params[0], cfg("1,2,1,1,z0,seq")), Error);
}

TEST(PlanFragments, ZeroThreeOnFourRanks) {
  const ModelSpec spec = testing::single_param_model({1024});
  const auto entries = plan_fragments(spec, cfg("4,1,1,1,z3,seq"));
  ASSERT_EQ(entries.size(), 12u);
  for (const auto& e : entries) {
    EXPECT_EQ(e.shape, (Shape{256}));
    EXPECT_EQ(e.pad_elems, 0u);
  }
}

// Two independent descriptions of a fragment (the materialized tensor and
// the element index map) must agree for every layout in the grid.
TEST(Materialize, AgreesWithFragmentIndices) {
  auto configs = default_grid_configs();
  configs.push_back(cfg("1,4,1,1,z0,seq,rows2"));
  configs.push_back(cfg("2,2,1,1,z1,seq,rows2"));
  configs.push_back(cfg("3,1,1,1,z3,seq"));
  for (const auto& model : default_grid_models()) {
    const ModelSpec spec = make_model(model.family, model.scale);
    const ModelState state = init_state(spec, 5);
    for (const auto& c : compatible_configs(spec, configs)) {
      for (const auto& e : plan_fragments(spec, c)) {
        const Tensor& full = state.params.at(e.param).get(e.state);
        const Tensor frag = materialize(full, e);
        const auto idx = fragment_indices(e);
        ASSERT_EQ(idx.size(), frag.numel());
        ASSERT_EQ(frag.shape(), e.shape);
        std::uint64_t pads = 0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
          if (idx[j] == kPadIndex) {
            ++pads;
            ASSERT_EQ(testing::bits_of(frag.f32()[j]), 0u);
            continue;
          }
          const float x = full.f32()[idx[j]];
          const float expect = e.pattern.tensor.kind == PatternKind::kPartial
                                   ? partial_member(x, e.param, e.state, e.placement.tp_rank,
                                                    e.tp_degree, idx[j])
                                   : x;
          ASSERT_EQ(testing::bits_of(frag.f32()[j]), testing::bits_of(expect))
              << e.param << " " << c.to_string() << " rank " << e.rank << " j " << j;
        }
        ASSERT_EQ(pads, e.pad_elems) << e.param << " " << c.to_string();
      }
    }
  }
}

TEST(Partition, ConservationCounts) {
  const ModelSpec spec = make_model(ModelFamily::kDenseGPT, {});
  const World w = build_world(spec, init_state(spec, 1), cfg("1,2,1,1,z0,seq"));
  auto stored = [&](const std::string& name) {
    std::uint64_t n = 0;
    for (const auto& r : w.ranks) {
      if (const auto* f = r.find(name, StateKind::kWeight)) n += f->tensor.numel();
    }
    return n;
  };
  EXPECT_EQ(stored("layers.0.attn.qkv.weight"), numel(spec.param("layers.0.attn.qkv.weight").shape));
  EXPECT_EQ(stored("layers.0.input_norm.weight"), 2 * numel(spec.param("layers.0.input_norm.weight").shape));
}

TEST(Partition, IdentityConfigIsUnique) {
  const ModelSpec spec = make_model(ModelFamily::kGQA, {});
  const ModelState s = init_state(spec, 2);
  const World w = build_world(spec, s, cfg("1,1,1,1,z0,seq"));
  ASSERT_EQ(w.ranks.size(), 1u);
  for (const auto& f : w.ranks[0].fragments) {
    EXPECT_EQ(f.entry.pattern.summary(), PatternKind::kUnique);
    EXPECT_EQ(f.tensor, s.params.at(f.entry.param).get(f.entry.state));
  }
}

TEST(Partition, ThreadCountDoesNotChangeBytes) {
  const ModelSpec spec = make_model(ModelFamily::kMoE, {});
  const ModelState s = init_state(spec, 2);
  testing::TempDir dir;
  partition(spec, s, cfg("2,2,2,1,z1,seq"), dir / "a", {1});
  partition(spec, s, cfg("2,2,2,1,z1,seq"), dir / "b", {4});
  EXPECT_TRUE(same_tree(dir / "a", dir / "b"));
  EXPECT_EQ(read_world(dir / "a"), build_world(spec, s, cfg("2,2,2,1,z1,seq")));
  EXPECT_THROW(partition(spec, s, cfg("2,2,2,1,z1,seq"), dir / "a"), Error);
}

// The tp variants of a Partial value average to it exactly in f64.
TEST(PartialMember, MeanIsExact) {
  std::mt19937_64 rng(99);
  std::vector<float> xs = {0.0f, -0.0f, 1.0f, -1.0f, testing::float_of(0x00000001),
                           testing::float_of(0x3F7FFFFF), testing::float_of(0x7F7FFFFF),
                           testing::float_of(0x00800000)};
  for (int i = 0; i < 5000; ++i) {
    const std::uint32_t u = static_cast<std::uint32_t>(rng());
    if (((u >> 23) & 0xFF) != 0xFF) xs.push_back(testing::float_of(u));
  }
  for (std::uint32_t tp : {2u, 3u, 4u, 8u}) {
    std::uint64_t moved = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double sum = -0.0;
      for (std::uint32_t r = 0; r < tp; ++r) {
        const float y = partial_member(xs[i], "p", StateKind::kAdamM, r, tp, i);
        sum += y;
        moved += testing::bits_of(y) != testing::bits_of(xs[i]);
      }
      ASSERT_EQ(testing::bits_of(static_cast<float>(sum / tp)), testing::bits_of(xs[i]))
          << std::hex << testing::bits_of(xs[i]) << " tp " << tp;
    }
    EXPECT_GT(moved, xs.size());  // the variants really differ
  }
}

}  // namespace
}  // namespace ucp
