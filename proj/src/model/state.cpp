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

#include "ucp/state.hpp"

#include <cmath>

namespace ucp {

std::string_view state_kind_name(StateKind kind) {
  switch (kind) {
    case StateKind::kWeight: return "weight";
    case StateKind::kAdamM: return "adam_m";
    case StateKind::kAdamV: return "adam_v";
  }
  return "?";
}

StateKind parse_state_kind(std::string_view name) {
  for (auto k : kStateKinds) {
    if (state_kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown state kind '" + std::string(name) + "'");
}

Tensor& ParamState::get(StateKind kind) {
  return kind == StateKind::kWeight ? weight : kind == StateKind::kAdamM ? adam_m : adam_v;
}

const Tensor& ParamState::get(StateKind kind) const {
  return kind == StateKind::kWeight ? weight : kind == StateKind::kAdamM ? adam_m : adam_v;
}

ModelState init_state(const ModelSpec& spec, std::uint64_t seed) {
  ModelState state;
  for (const auto& p : spec.params) {
    const std::string& src = spec.grad_key(p.name);
    ParamState ps{gen_tensor(seed, src, "weight", p.shape), gen_tensor(seed, src, "m", p.shape),
                  gen_tensor(seed, src, "v", p.shape)};
    for (auto& x : ps.adam_v.mutable_f32()) x = std::fabs(x);
    state.params.emplace(p.name, std::move(ps));
  }
  state.step = 0;
  state.metadata["loss_scale"] = 65536.0;
  return state;
}

}  // namespace ucp
