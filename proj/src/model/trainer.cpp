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

#include "ucp/trainer.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "ucp/hash.hpp"
#include "ucp/parallel.hpp"

namespace ucp {

void TrainerConfig::validate() const {
  if (!(beta1 > 0 && beta1 < 1 && beta2 > 0 && beta2 < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "betas must lie in (0, 1)");
  }
}

namespace {

std::string grad_tag(std::uint64_t step) { return "grad/" + std::to_string(step); }

struct StepConstants {
  double b1, b2, one_minus_b1, one_minus_b2, bc1, bc2, lr, eps;
};

StepConstants constants(const TrainerConfig& cfg, std::uint64_t step) {
  // Powers by repeated multiplication so the result never depends on libm.
  double p1 = 1.0, p2 = 1.0;
  for (std::uint64_t i = 0; i <= step; ++i) {
    p1 *= cfg.beta1;
    p2 *= cfg.beta2;
  }
  return {cfg.beta1, cfg.beta2, 1.0 - cfg.beta1, 1.0 - cfg.beta2, 1.0 - p1, 1.0 - p2, cfg.lr,
          cfg.eps};
}

inline void update(float& w, float& m, float& v, double g, const StepConstants& c) {
  const double m1 = c.b1 * static_cast<double>(m) + c.one_minus_b1 * g;
  const double v1 = c.b2 * static_cast<double>(v) + c.one_minus_b2 * (g * g);
  const double m_hat = m1 / c.bc1;
  const double v_hat = v1 / c.bc2;
  const double w1 = static_cast<double>(w) - c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  m = static_cast<float>(m1);
  v = static_cast<float>(v1);
  w = static_cast<float>(w1);
}

void check_spans(std::size_t w, std::size_t m, std::size_t v) {
  if (w != m || w != v) throw Error(ErrorCode::kShapeMismatch, "weight/m/v sizes differ");
}

}  // namespace

float synthetic_grad(std::uint64_t grad_seed, std::string_view grad_key, std::uint64_t step,
                     std::uint64_t index) {
  return unit_value(element_hash(stream_key(grad_seed, grad_key, grad_tag(step)), index));
}

void adam_step(std::span<float> weight, std::span<float> adam_m, std::span<float> adam_v,
               std::span<const std::uint64_t> indices, std::string_view grad_key,
               const TrainerConfig& cfg, std::uint64_t step) {
  check_spans(weight.size(), adam_m.size(), adam_v.size());
  if (indices.size() != weight.size()) {
    throw Error(ErrorCode::kShapeMismatch, "index map size differs from fragment");
  }
  const auto c = constants(cfg, step);
  const std::uint64_t key = stream_key(cfg.grad_seed, grad_key, grad_tag(step));
  for (std::size_t j = 0; j < weight.size(); ++j) {
    if (indices[j] == kPadIndex) continue;
    const double g = unit_value(element_hash(key, indices[j]));
    update(weight[j], adam_m[j], adam_v[j], g, c);
  }
}

void adam_step(std::span<float> weight, std::span<float> adam_m, std::span<float> adam_v,
               std::uint64_t first, std::string_view grad_key, const TrainerConfig& cfg,
               std::uint64_t step) {
  check_spans(weight.size(), adam_m.size(), adam_v.size());
  const auto c = constants(cfg, step);
  const std::uint64_t key = stream_key(cfg.grad_seed, grad_key, grad_tag(step));
  for (std::size_t j = 0; j < weight.size(); ++j) {
    const double g = unit_value(element_hash(key, first + j));
    update(weight[j], adam_m[j], adam_v[j], g, c);
  }
}

ModelState train_steps(const ModelSpec& spec, ModelState state, const TrainerConfig& cfg,
                       std::uint64_t from_step, std::uint64_t n, unsigned threads) {
  cfg.validate();
  if (state.step != from_step) {
    throw Error(ErrorCode::kInvalidArgument, "state is at step " + std::to_string(state.step) +
                                                 ", not " + std::to_string(from_step));
  }
  std::vector<std::pair<const std::string*, ParamState*>> work;
  for (auto& [name, ps] : state.params) work.emplace_back(&name, &ps);
  parallel_for(work.size(), threads, [&](std::size_t i) {
    auto& ps = *work[i].second;
    const std::string& key = spec.grad_key(*work[i].first);
    for (std::uint64_t t = from_step; t < from_step + n; ++t) {
      adam_step(ps.weight.mutable_f32(), ps.adam_m.mutable_f32(), ps.adam_v.mutable_f32(), 0,
                key, cfg, t);
    }
  });
  state.step = from_step + n;
  return state;
}

}  // namespace ucp
