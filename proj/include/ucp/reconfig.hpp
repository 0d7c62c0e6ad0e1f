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
#include <functional>
#include <string>
#include <vector>

#include "ucp/model.hpp"
#include "ucp/shard.hpp"
#include "ucp/work_plan.hpp"

namespace ucp {

// One fragment of one (param, state) as read from a rank directory. The
// entry carries placement, stacked pattern, flat range and padding, so a
// reducer needs nothing beyond its messages.
struct FragmentMsg {
  ShardEntry entry;
  Tensor tensor;
  std::uint32_t source_rank = 0;
};

// Emits one message per manifest entry, in manifest order. Throws kManifest
// when the manifest is missing or disagrees with the files in the
// directory, and the tensor-file errors for corrupt payloads.
void extract(const std::filesystem::path& rank_dir,
             const std::function<void(FragmentMsg&&)>& sink);
std::vector<FragmentMsg> extract(const std::filesystem::path& rank_dir);

struct UnionOptions {
  // Verify that every replica is bit-identical instead of taking the first.
  bool strict_replicate = true;
};

// Consolidates all fragments of one (param, state). Levels are undone inner
// to outer: flat ZeRO ranges (then strip_pad), then the tensor-parallel
// pattern, then pipeline replication.
//   Replicate  first replica (all checked equal when strict)
//   Partial    f64 mean in ascending tp_rank order, rounded to f32
//   ShardV/H   concat on axis 0 / 1 by tp_rank
//   ShardHy    row-major assembly of the tp_rows x tp_cols grid
//   ShardNC    per segment, concat of each rank's piece; then segments in order
// Throws kMissingFragment, kOverlappingRange, kReplicaMismatch,
// kNonzeroPadding or kShapeMismatch.
Tensor union_fragments(const ParamSpec& param, StateKind state, std::vector<FragmentMsg> msgs,
                       const UnionOptions& options = {});

// Drops `pad_elems` trailing elements of a rank-1 tensor and reshapes to
// `target`. The dropped elements must be all-zero bytes.
Tensor strip_pad(const Tensor& t, std::uint64_t pad_elems, const Shape& target);

struct ConvertOptions {
  std::uint32_t workers = 1;  // mappers and reducer groups
  std::uint32_t inner = 1;    // threads per reducer group
  bool strict_replicate = true;
  std::size_t queue_capacity = 64;
};

struct ConvertStats {
  WorkPlan plan;
  std::uint64_t messages_emitted = 0;
  std::uint64_t messages_consumed = 0;
  std::uint64_t params_written = 0;
};

// Distributed checkpoint -> atomic checkpoint. Mappers extract rank
// directories in parallel and route each message to the reducer group that
// owns its param under plan_work; reducers union, strip and save params as
// soon as all of their fragments have arrived. The output tree is a pure
// function of the source tree.
ConvertStats convert(const std::filesystem::path& src, const std::filesystem::path& out,
                     const ConvertOptions& options = {});

// Number of convert() calls made by this process.
std::uint64_t conversion_invocations();

}  // namespace ucp
