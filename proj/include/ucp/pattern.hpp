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

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ucp/model.hpp"
#include "ucp/parallel_config.hpp"
#include "ucp/state.hpp"

namespace ucp {

// How a parameter relates to its fragments across a set of ranks.
enum class PatternKind : std::uint8_t {
  kUnique,     // exactly one holder
  kReplicate,  // every holder has the full value, bit-identical
  kPartial,    // every holder has its own variant; the value is their mean
  kShardV,     // contiguous split of axis 0 (or of the flat view, for ZeRO)
  kShardH,     // contiguous split of axis 1
  kShardHy,    // 2-D grid split of axes 0 and 1
  kShardNC,    // each axis-0 segment split separately, pieces concatenated
};

std::string_view pattern_name(PatternKind kind);
PatternKind parse_pattern(std::string_view name);

struct Pattern {
  PatternKind kind = PatternKind::kUnique;
  std::vector<Segment> segments;  // kShardNC
  std::uint32_t grid_rows = 1;    // kShardHy
  std::uint32_t grid_cols = 1;

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

// A parameter's pattern at each parallelism level, outermost first.
//   pipeline: across the pp stages in `stages` (Replicate for tied params
//             living on several stages, else Unique)
//   tensor:   across the tp group
//   data:     across the dp group; kShardV here means flat ZeRO ranges
struct StackedPattern {
  Pattern pipeline;
  Pattern tensor;
  Pattern data;
  std::vector<std::uint32_t> stages;

  // The innermost non-Unique level, or Unique.
  PatternKind summary() const;

  friend bool operator==(const StackedPattern&, const StackedPattern&) = default;
};

// Patterns for weight, adam_m and adam_v (indexed by StateKind). Throws
// kPatternCoverage when no rule covers the (kind, shape, config) combination,
// kIncompatibleConfig when the config itself is invalid.
std::array<StackedPattern, 3> assign_pattern(const ModelSpec& spec, const ParamSpec& param,
                                             const ParallelConfig& cfg);

}  // namespace ucp
