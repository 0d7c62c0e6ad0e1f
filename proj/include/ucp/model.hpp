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
#include <string_view>
#include <utility>
#include <vector>

#include "ucp/tensor.hpp"

namespace ucp {

enum class ParamKind {
  kMatmul2D,
  kFusedExpert3DLike,
  kFusedQKV,
  kLayerNormWeight,
  kLayerNormBias,
  kEmbedding,
  kTiedEmbedding,
  kAsyncPartial,
};

std::string_view param_kind_name(ParamKind kind);
ParamKind parse_param_kind(std::string_view name);

// A contiguous row block [offset, offset + length) on axis 0.
struct Segment {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct ParamSpec {
  std::string name;
  Shape shape;
  std::uint32_t layer_index = 0;
  ParamKind kind = ParamKind::kMatmul2D;
  // 0 for column-parallel (split rows of [out, in]), 1 for row-parallel.
  std::optional<std::uint32_t> tp_axis_hint;
  // Fused blocks on axis 0 (experts, or q/k/v); empty for regular params.
  std::vector<Segment> nc_segments;

  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

struct ModelSpec {
  std::string name;
  std::vector<ParamSpec> params;
  std::uint32_t n_layers = 0;
  std::vector<std::pair<std::string, std::string>> tied_pairs;

  const ParamSpec* find(std::string_view param) const;
  const ParamSpec& param(std::string_view param) const;

  // Number of pipeline-assignable layer slots. A model with zero transformer
  // layers still has one slot holding its embedding and head.
  std::uint32_t layer_slots() const { return n_layers == 0 ? 1 : n_layers; }

  // Name whose gradient stream drives `param`: the first member of its tied
  // pair, else the param itself.
  const std::string& grad_key(std::string_view param) const;

  // Names tied to `param`, including itself, in declaration order.
  std::vector<std::string> tied_group(std::string_view param) const;

  // Throws kInvalidArgument on any broken schema invariant.
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

enum class ModelFamily { kDenseGPT, kMoE, kGQA };

std::string_view model_family_name(ModelFamily family);
ModelFamily parse_model_family(std::string_view name);

// Hidden sizes must split evenly under every tensor-parallel degree up to this.
inline constexpr std::uint32_t kMaxTpDegree = 8;

struct ModelScale {
  std::uint32_t n_layers = 4;
  std::uint32_t hidden = 64;
  std::uint32_t vocab = 0;          // 0 selects 4 * hidden
  std::uint32_t ffn = 0;            // dense MLP width; 0 selects 4 * hidden
  std::uint32_t n_experts = 4;      // MoE only
  std::uint32_t expert_hidden = 0;  // MoE hidden_out per expert; 0 selects 2 * hidden
  std::uint32_t q_heads = 8;
  std::uint32_t kv_heads = 2;       // GQA only
};

ModelScale parse_model_scale(std::string_view json_text);

ModelSpec make_model(ModelFamily family, const ModelScale& scale);

// model.json: keys name, n_layers, tied_pairs, params in that order.
std::string model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(std::string_view text);

}  // namespace ucp
