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

#include "ucp/layout.hpp"

#include <algorithm>

namespace ucp {

std::uint64_t ZeroSplit::pad_in(std::uint32_t rank) const {
  const auto r = range(rank);
  if (r.end <= numel) return 0;
  return r.end - std::max(r.start, numel);
}

ZeroSplit zero_split(std::uint64_t numel, std::uint32_t dp) {
  if (dp == 0) throw Error(ErrorCode::kInvalidArgument, "dp must be >= 1");
  const std::uint64_t chunk = (numel + dp - 1) / dp;
  return {numel, chunk * dp, chunk, dp};
}

ZeroFlat zero_flatten(const Tensor& t, std::uint32_t dp) {
  const auto split = zero_split(t.numel(), dp);
  Tensor padded(t.dtype(), Shape{split.padded});
  std::copy(t.bytes().begin(), t.bytes().end(), padded.mutable_bytes().begin());
  ZeroFlat out{std::move(padded), split.total_pad(), {}};
  for (std::uint32_t r = 0; r < dp; ++r) out.ranges.push_back(split.range(r));
  return out;
}

std::vector<std::vector<std::uint32_t>> pp_layer_map(std::uint32_t n_layers, std::uint32_t pp,
                                                     const PipelineSchedule& schedule) {
  if (pp == 0) throw Error(ErrorCode::kIncompatibleConfig, "pp must be >= 1");
  std::vector<std::vector<std::uint32_t>> stages(pp);
  if (schedule.kind == PipelineSchedule::Kind::kInterleaved) {
    const std::uint32_t chunks = pp * schedule.chunks;
    if (schedule.chunks == 0 || n_layers % chunks != 0) {
      throw Error(ErrorCode::kIncompatibleConfig,
                  std::to_string(n_layers) + " layers do not split into " +
                      std::to_string(chunks) + " chunks");
    }
    const std::uint32_t per_chunk = n_layers / chunks;
    for (std::uint32_t j = 0; j < chunks; ++j) {
      for (std::uint32_t l = j * per_chunk; l < (j + 1) * per_chunk; ++l) {
        stages[j % pp].push_back(l);
      }
    }
    return stages;
  }
  const std::uint32_t base = n_layers / pp;
  const std::uint32_t rem = n_layers % pp;
  std::uint32_t next = 0;
  for (std::uint32_t s = 0; s < pp; ++s) {
    const std::uint32_t count = base + (s < rem ? 1 : 0);
    for (std::uint32_t i = 0; i < count; ++i) stages[s].push_back(next++);
  }
  return stages;
}

std::vector<std::uint32_t> stage_of_layers(std::uint32_t n_layers, std::uint32_t pp,
                                           const PipelineSchedule& schedule) {
  std::vector<std::uint32_t> out(n_layers, 0);
  const auto stages = pp_layer_map(n_layers, pp, schedule);
  for (std::uint32_t s = 0; s < stages.size(); ++s) {
    for (auto l : stages[s]) out[l] = s;
  }
  return out;
}

}  // namespace ucp
