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
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "ucp/model.hpp"
#include "ucp/tensor.hpp"

namespace ucp {

enum class StateKind : std::uint8_t { kWeight = 0, kAdamM = 1, kAdamV = 2 };

inline constexpr std::array<StateKind, 3> kStateKinds = {StateKind::kWeight, StateKind::kAdamM,
                                                         StateKind::kAdamV};

// "weight", "adam_m", "adam_v"; doubles as the atomic file stem.
std::string_view state_kind_name(StateKind kind);
StateKind parse_state_kind(std::string_view name);

struct ParamState {
  Tensor weight;
  Tensor adam_m;
  Tensor adam_v;

  Tensor& get(StateKind kind);
  const Tensor& get(StateKind kind) const;
  friend bool operator==(const ParamState&, const ParamState&) = default;
};

struct ModelState {
  std::map<std::string, ParamState> params;
  std::uint64_t step = 0;
  // Carried through every checkpoint untouched (e.g. loss_scale).
  std::map<std::string, double> metadata;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

// weight, m and |v| drawn from gen_tensor with tags "weight", "m", "v". Tied
// params copy the first member of their pair.
ModelState init_state(const ModelSpec& spec, std::uint64_t seed);

}  // namespace ucp
