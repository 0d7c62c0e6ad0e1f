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
#include <string>
#include <string_view>

namespace ucp {

enum class ZeroStage : std::uint8_t { kZ0 = 0, kZ1 = 1, kZ3 = 3 };

struct PipelineSchedule {
  enum class Kind : std::uint8_t { kSequential1F1B, kInterleaved };
  Kind kind = Kind::kSequential1F1B;
  // Model chunks per stage; only meaningful for kInterleaved.
  std::uint32_t chunks = 1;

  static PipelineSchedule sequential() { return {}; }
  static PipelineSchedule interleaved(std::uint32_t v) { return {Kind::kInterleaved, v}; }
  friend bool operator==(const PipelineSchedule&, const PipelineSchedule&) = default;
};

struct Placement {
  std::uint32_t pp_rank = 0;
  std::uint32_t tp_rank = 0;
  std::uint32_t dp_rank = 0;
  friend bool operator==(const Placement&, const Placement&) = default;
};

// A parallelism strategy over dp * tp * pp ranks. Sequence parallelism does
// not change what a rank stores, so sp is carried but never affects layout.
struct ParallelConfig {
  std::uint32_t dp = 1;
  std::uint32_t tp = 1;
  std::uint32_t pp = 1;
  std::uint32_t sp = 1;
  ZeroStage zero = ZeroStage::kZ0;
  PipelineSchedule schedule;
  // > 1 lays the tp group out as a tp_rows x (tp / tp_rows) grid and shards
  // 2-D matmuls along both axes.
  std::uint32_t tp_rows = 1;

  std::uint32_t world_size() const { return dp * tp * pp; }

  // Global rank order: pp outermost, dp innermost.
  std::uint32_t rank_of(const Placement& p) const { return (p.pp_rank * tp + p.tp_rank) * dp + p.dp_rank; }
  Placement placement(std::uint32_t rank) const {
    return {rank / (dp * tp), (rank / dp) % tp, rank % dp};
  }

  // Structural checks plus those that depend on the model depth. Throws
  // kIncompatibleConfig.
  void validate(std::uint32_t layer_slots) const;

  // "dp,tp,pp,sp,zero,schedule[,rows]", e.g. "2,2,2,1,z1,seq" or
  // "2,1,2,1,z0,int2" or "1,4,1,1,z0,seq,rows2".
  std::string to_string() const;
  static ParallelConfig parse(std::string_view text);

  friend bool operator==(const ParallelConfig&, const ParallelConfig&) = default;
};

std::string_view zero_stage_name(ZeroStage zero);

}  // namespace ucp
