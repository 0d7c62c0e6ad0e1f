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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "ucp/manifest.hpp"
#include "ucp/model.hpp"
#include "ucp/shard.hpp"
#include "ucp/state.hpp"

namespace ucp {

struct Fragment {
  ShardEntry entry;
  Tensor tensor;
  friend bool operator==(const Fragment&, const Fragment&) = default;
};

struct RankShards {
  std::uint32_t rank = 0;
  Placement placement;
  std::vector<Fragment> fragments;

  const Fragment* find(std::string_view param, StateKind state) const;
  friend bool operator==(const RankShards&, const RankShards&) = default;
};

// The in-memory image of a distributed checkpoint: what every simulated rank
// holds under one parallel config.
struct World {
  ModelSpec spec;
  CheckpointMeta meta;
  std::vector<RankShards> ranks;

  friend bool operator==(const World&, const World&) = default;
};

// Throws kShapeMismatch unless `state` has exactly the ModelSpec's params, each
// weight/m/v f32 with the param's shape.
void check_state_matches(const ModelSpec& spec, const ModelState& state);

RankShards build_rank(const ModelSpec& spec, const ModelState& state, const ParallelConfig& cfg,
                      std::uint32_t rank);

World build_world(const ModelSpec& spec, const ModelState& state, const ParallelConfig& cfg,
                  unsigned threads = 1);

struct PartitionOptions {
  unsigned threads = 1;
};

// Writes the distributed checkpoint of `state` under `cfg` into the empty (or
// absent) directory `out_dir`:
//   model.json, config.json, rank_<g>/{shards.json, <param>.<state>.ucpt}
// Each rank's shards.json is renamed into place after its tensors, and
// config.json after every rank, so a tree with config.json is complete.
// Output bytes do not depend on `threads`.
void partition(const ModelSpec& spec, const ModelState& state, const ParallelConfig& cfg,
               const std::filesystem::path& out_dir, PartitionOptions options = {});

// Same layout, from an in-memory world.
void save_world(const World& world, const std::filesystem::path& out_dir, unsigned threads = 1);

// Reads a whole distributed checkpoint, checking rank count, manifests
// against files, and tensor headers against manifest entries.
World read_world(const std::filesystem::path& ckpt_dir, unsigned threads = 1);

}  // namespace ucp
