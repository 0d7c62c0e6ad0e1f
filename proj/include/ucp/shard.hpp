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
#include <optional>
#include <string>
#include <vector>

#include "ucp/layout.hpp"
#include "ucp/model.hpp"
#include "ucp/parallel_config.hpp"
#include "ucp/pattern.hpp"
#include "ucp/state.hpp"
#include "ucp/tensor.hpp"

namespace ucp {

// Everything needed to place one fragment of one state tensor on one rank,
// and to put it back. Written verbatim into each rank's shards.json, so a
// fragment read from disk is self-describing.
struct ShardEntry {
  std::string param;
  StateKind state = StateKind::kWeight;
  std::string file;
  DType dtype = DType::kF32;
  std::uint32_t rank = 0;
  Placement placement;
  StackedPattern pattern;
  std::uint32_t tp_degree = 1;
  std::uint32_t dp_degree = 1;
  Shape param_shape;  // the consolidated parameter
  Shape tp_shape;     // after the tensor level, before the data level
  Shape shape;        // what is stored
  // Data-level flat sharding only.
  std::optional<FlatRange> flat_range;
  std::uint64_t padded_numel = 0;
  std::uint64_t pad_elems = 0;  // padding inside flat_range

  // Fragments of this (param, state) across the whole checkpoint.
  std::uint64_t fragment_count() const {
    return pattern.stages.size() * static_cast<std::uint64_t>(tp_degree) * dp_degree;
  }

  friend bool operator==(const ShardEntry&, const ShardEntry&) = default;
};

std::string shard_file_name(const std::string& param, StateKind state);

// Entries of every rank in rank order; within a rank, model param order then
// weight, adam_m, adam_v. Throws like assign_pattern.
std::vector<ShardEntry> plan_fragments(const ModelSpec& spec, const ParallelConfig& cfg);

// Entries of one rank only.
std::vector<ShardEntry> plan_rank(const ModelSpec& spec, const ParallelConfig& cfg,
                                  std::uint32_t rank);

// Cuts `entry`'s fragment out of the consolidated f32 tensor.
Tensor materialize(const Tensor& full, const ShardEntry& entry);

// Flat index into the consolidated tensor of every fragment element, in
// fragment order; kPadIndex for ZeRO padding.
std::vector<std::uint64_t> fragment_indices(const ShardEntry& entry);

// The variant of `x` that tp rank `tp_rank` of `tp_degree` holds for a Partial
// parameter. Ranks r and tp_degree-1-r move |x| by +j and -j units in the
// last place (the middle rank of an odd group keeps x), with j in [1, 8]
// drawn from (param, state, pair, index). Offsets that would leave x's
// binade are dropped, so every variant is exact and the f64 mean over the
// group is exactly x.
float partial_member(float x, std::string_view param, StateKind state, std::uint32_t tp_rank,
                     std::uint32_t tp_degree, std::uint64_t index);

}  // namespace ucp
