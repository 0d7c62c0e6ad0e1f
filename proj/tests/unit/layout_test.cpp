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

#include "ucp/error.hpp"
#include "ucp/layout.hpp"
#include "ucp/parallel_config.hpp"

namespace ucp {
namespace {

using Layers = std::vector<std::vector<std::uint32_t>>;

TEST(ZeroSplit, PaddingExamples) {
  const ZeroSplit three = zero_split(1024, 3);
  EXPECT_EQ(three.padded, 1026u);
  EXPECT_EQ(three.chunk, 342u);
  EXPECT_EQ(three.total_pad(), 2u);
  EXPECT_EQ(three.pad_in(0), 0u);
  EXPECT_EQ(three.pad_in(1), 0u);
  EXPECT_EQ(three.pad_in(2), 2u);

  const ZeroSplit two = zero_split(1024, 2);
  EXPECT_EQ(two.padded, 1024u);
  EXPECT_EQ(two.chunk, 512u);
  EXPECT_EQ(two.total_pad(), 0u);

  const ZeroSplit one = zero_split(5, 1);
  EXPECT_EQ(one.range(0), (FlatRange{0, 5}));
  EXPECT_EQ(one.total_pad(), 0u);
}

// With fewer elements than ranks, padding spills into several ranges.
TEST(ZeroSplit, PadCanSpanSeveralRanges) {
  const ZeroSplit s = zero_split(5, 4);
  EXPECT_EQ(s.padded, 8u);
  EXPECT_EQ(s.pad_in(0), 0u);
  EXPECT_EQ(s.pad_in(1), 0u);
  EXPECT_EQ(s.pad_in(2), 1u);
  EXPECT_EQ(s.pad_in(3), 2u);
}

TEST(ZeroFlatten, PadsWithZeros) {
  const Tensor t = gen_tensor(1, "z", "weight", {2, 512});
  const ZeroFlat f = zero_flatten(t, 3);
  EXPECT_EQ(f.padded_flat.shape(), (Shape{1026}));
  EXPECT_EQ(f.pad_elems, 2u);
  ASSERT_EQ(f.ranges.size(), 3u);
  EXPECT_EQ(f.ranges[2], (FlatRange{684, 1026}));
  EXPECT_EQ(f.padded_flat.f32()[1024], 0.0f);
  EXPECT_EQ(f.padded_flat.f32()[1025], 0.0f);
  EXPECT_EQ(slice_flat(f.padded_flat, 0, 1024), flatten(t));
}

TEST(PpLayerMap, Examples) {
  EXPECT_EQ(pp_layer_map(8, 2, PipelineSchedule::interleaved(2)),
            (Layers{{0, 1, 4, 5}, {2, 3, 6, 7}}));
  EXPECT_EQ(pp_layer_map(8, 2, PipelineSchedule::sequential()),
            (Layers{{0, 1, 2, 3}, {4, 5, 6, 7}}));
  EXPECT_EQ(pp_layer_map(5, 1, PipelineSchedule::sequential()), (Layers{{0, 1, 2, 3, 4}}));
  // Remainder to the earliest stages.
  EXPECT_EQ(pp_layer_map(5, 3, PipelineSchedule::sequential()), (Layers{{0, 1}, {2, 3}, {4}}));
  EXPECT_EQ(stage_of_layers(8, 2, PipelineSchedule::interleaved(2)),
            (std::vector<std::uint32_t>{0, 0, 1, 1, 0, 0, 1, 1}));
}

TEST(PpLayerMap, InterleavedDivisibility) {
  EXPECT_THROW(pp_layer_map(6, 2, PipelineSchedule::interleaved(2)), Error);
}

TEST(ParallelConfig, ParseFormatAndRankOrder) {
  for (const char* text : {"2,2,2,1,z1,seq", "2,1,2,1,z0,int2", "1,4,1,1,z0,seq,rows2",
                           "4,1,1,1,z3,seq"}) {
    EXPECT_EQ(ParallelConfig::parse(text).to_string(), text);
  }
  const ParallelConfig c = ParallelConfig::parse("2,2,2,1,z1,seq");
  EXPECT_EQ(c.world_size(), 8u);
  for (std::uint32_t g = 0; g < 8; ++g) EXPECT_EQ(c.rank_of(c.placement(g)), g);
  EXPECT_EQ(c.rank_of({1, 0, 1}), 5u);  // ((1*2+0)*2+1)
  EXPECT_THROW(ParallelConfig::parse("2,2"), Error);
  EXPECT_THROW(ParallelConfig::parse("2,2,2,1,z2,seq"), Error);
}

TEST(ParallelConfig, Compatibility) {
  auto bad = [](const char* t, std::uint32_t slots) {
    try {
      ParallelConfig::parse(t).validate(slots);
    } catch (const Error& e) {
      return e.code() == ErrorCode::kIncompatibleConfig;
    }
    return false;
  };
  EXPECT_TRUE(bad("2,2,1,1,z3,seq", 4));
  EXPECT_TRUE(bad("2,1,2,1,z3,seq", 4));
  EXPECT_TRUE(bad("1,1,1,1,z0,int2", 4));  // interleaving needs pp >= 2
  EXPECT_TRUE(bad("1,1,2,1,z0,int2", 6));
  EXPECT_TRUE(bad("1,1,8,1,z0,seq", 4));
  EXPECT_TRUE(bad("1,4,1,1,z0,seq,rows3", 4));
  EXPECT_FALSE(bad("4,1,1,1,z3,seq", 4));
  EXPECT_FALSE(bad("1,1,2,1,z0,int2", 4));
}

}  // namespace
}  // namespace ucp
