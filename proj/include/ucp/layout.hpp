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
#include <vector>

#include "ucp/parallel_config.hpp"
#include "ucp/tensor.hpp"

namespace ucp {

struct FlatRange {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  std::uint64_t size() const { return end - start; }
  friend bool operator==(const FlatRange&, const FlatRange&) = default;
};

// Arithmetic of splitting `numel` flat elements over `dp` ranks the way ZeRO
// does: pad with zeros up to a multiple of dp, then cut equal ranges.
struct ZeroSplit {
  std::uint64_t numel = 0;
  std::uint64_t padded = 0;
  std::uint64_t chunk = 0;
  std::uint32_t dp = 1;

  std::uint64_t total_pad() const { return padded - numel; }
  FlatRange range(std::uint32_t rank) const { return {rank * chunk, (rank + 1) * chunk}; }
  // Padding elements falling inside `rank`'s range.
  std::uint64_t pad_in(std::uint32_t rank) const;
};

ZeroSplit zero_split(std::uint64_t numel, std::uint32_t dp);

struct ZeroFlat {
  Tensor padded_flat;
  std::uint64_t pad_elems = 0;
  std::vector<FlatRange> ranges;
};

// Flattens row-major and zero-pads to ceil(numel / dp) * dp.
ZeroFlat zero_flatten(const Tensor& t, std::uint32_t dp);

// stage -> layers it holds. Sequential gives contiguous blocks with the
// remainder going to the earliest stages. Interleaved(v) cuts the layers into
// pp * v equal contiguous chunks and gives chunk j to stage j mod pp.
std::vector<std::vector<std::uint32_t>> pp_layer_map(std::uint32_t n_layers, std::uint32_t pp,
                                                     const PipelineSchedule& schedule);

// layer -> stage, inverse of pp_layer_map.
std::vector<std::uint32_t> stage_of_layers(std::uint32_t n_layers, std::uint32_t pp,
                                           const PipelineSchedule& schedule);

}  // namespace ucp
