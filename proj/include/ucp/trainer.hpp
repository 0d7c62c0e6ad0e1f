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
#include <span>
#include <string_view>

#include "ucp/model.hpp"
#include "ucp/state.hpp"

namespace ucp {

struct TrainerConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t grad_seed = 0x5eed;
  std::uint64_t steps = 100;

  void validate() const;
};

// Synthetic gradient of element `index` of the param whose gradient stream is
// `grad_key`, at 0-based step `step`. Depends on nothing else, so any shard
// of a parameter sees the same gradient as the whole.
float synthetic_grad(std::uint64_t grad_seed, std::string_view grad_key, std::uint64_t step,
                     std::uint64_t index);

// One Adam step at 0-based `step` on the elements of a fragment. `indices[j]`
// is the flat index of element j in its full parameter; kPadIndex entries
// are left untouched. Per element, in f64:
//   m = b1*m + (1-b1)*g
//   v = b2*v + (1-b2)*g*g
//   w = w - lr * (m / (1 - b1^(t+1))) / (sqrt(v / (1 - b2^(t+1))) + eps)
// and each result is rounded to f32 when stored.
void adam_step(std::span<float> weight, std::span<float> adam_m, std::span<float> adam_v,
               std::span<const std::uint64_t> indices, std::string_view grad_key,
               const TrainerConfig& cfg, std::uint64_t step);

// Same, for a fragment covering indices [first, first + weight.size()).
void adam_step(std::span<float> weight, std::span<float> adam_m, std::span<float> adam_v,
               std::uint64_t first, std::string_view grad_key, const TrainerConfig& cfg,
               std::uint64_t step);

// Runs steps [from_step, from_step + n). Requires state.step == from_step.
// `threads` parallelises over params; the result does not depend on it.
ModelState train_steps(const ModelSpec& spec, ModelState state, const TrainerConfig& cfg,
                       std::uint64_t from_step, std::uint64_t n, unsigned threads = 1);

}  // namespace ucp
