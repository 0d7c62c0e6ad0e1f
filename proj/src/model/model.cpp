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

#include "ucp/model.hpp"

#include <set>

#include "json.hpp"

namespace ucp {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::pair<ParamKind, std::string_view> kKindNames[] = {
    {ParamKind::kMatmul2D, "Matmul2D"},
    {ParamKind::kFusedExpert3DLike, "FusedExpert3DLike"},
    {ParamKind::kFusedQKV, "FusedQKV"},
    {ParamKind::kLayerNormWeight, "LayerNormWeight"},
    {ParamKind::kLayerNormBias, "LayerNormBias"},
    {ParamKind::kEmbedding, "Embedding"},
    {ParamKind::kTiedEmbedding, "TiedEmbedding"},
    {ParamKind::kAsyncPartial, "AsyncPartial"},
};

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace

std::string_view param_kind_name(ParamKind kind) {
  for (auto [k, n] : kKindNames) {
    if (k == kind) return n;
  }
  return "?";
}

ParamKind parse_param_kind(std::string_view name) {
  for (auto [k, n] : kKindNames) {
    if (n == name) return k;
  }
  invalid("unknown param kind '" + std::string(name) + "'");
}

const ParamSpec* ModelSpec::find(std::string_view param) const {
  for (const auto& p : params) {
    if (p.name == param) return &p;
  }
  return nullptr;
}

const ParamSpec& ModelSpec::param(std::string_view param) const {
  if (const auto* p = find(param)) return *p;
  invalid("model has no param '" + std::string(param) + "'");
}

const std::string& ModelSpec::grad_key(std::string_view param) const {
  for (const auto& [a, b] : tied_pairs) {
    if (b == param) return a;
  }
  return this->param(param).name;
}

std::vector<std::string> ModelSpec::tied_group(std::string_view param) const {
  const std::string& root = grad_key(param);
  std::vector<std::string> group{root};
  for (const auto& [a, b] : tied_pairs) {
    if (a == root) group.push_back(b);
  }
  return group;
}

void ModelSpec::validate() const {
  std::set<std::string_view> names;
  for (const auto& p : params) {
    if (!names.insert(p.name).second) invalid("duplicate param " + p.name);
    if (p.layer_index >= layer_slots()) {
      invalid(p.name + ": layer_index " + std::to_string(p.layer_index) + " >= " +
              std::to_string(layer_slots()));
    }
    if (p.kind == ParamKind::kFusedQKV || p.kind == ParamKind::kFusedExpert3DLike) {
      if (p.shape.empty()) invalid(p.name + ": fused param needs rank >= 1");
      if (p.kind == ParamKind::kFusedQKV && p.nc_segments.size() != 3) {
        invalid(p.name + ": FusedQKV needs exactly 3 segments");
      }
      if (p.kind == ParamKind::kFusedExpert3DLike) {
        if (p.nc_segments.empty() || p.shape[0] % p.nc_segments.size() != 0) {
          invalid(p.name + ": rows not divisible by expert count");
        }
        for (const auto& s : p.nc_segments) {
          if (s.length != p.shape[0] / p.nc_segments.size()) {
            invalid(p.name + ": expert blocks must be equal");
          }
        }
      }
      std::uint64_t next = 0;
      for (const auto& s : p.nc_segments) {
        if (s.offset != next || s.length == 0) invalid(p.name + ": segments must tile axis 0");
        next += s.length;
      }
      if (next != p.shape[0]) invalid(p.name + ": segments do not cover axis 0");
    } else if (!p.nc_segments.empty()) {
      invalid(p.name + ": only fused params carry segments");
    }
  }
  for (const auto& [a, b] : tied_pairs) {
    const auto* pa = find(a);
    const auto* pb = find(b);
    if (!pa || !pb) invalid("tied pair references unknown param");
    if (pa->shape != pb->shape) invalid("tied pair " + a + "/" + b + " has unequal shapes");
  }
}

std::string_view model_family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::kDenseGPT: return "dense";
    case ModelFamily::kMoE: return "moe";
    case ModelFamily::kGQA: return "gqa";
  }
  return "?";
}

ModelFamily parse_model_family(std::string_view name) {
  if (name == "dense" || name == "DenseGPT") return ModelFamily::kDenseGPT;
  if (name == "moe" || name == "MoE") return ModelFamily::kMoE;
  if (name == "gqa" || name == "GQA") return ModelFamily::kGQA;
  invalid("unknown model family '" + std::string(name) + "'");
}

ModelScale parse_model_scale(std::string_view json_text) {
  ModelScale s;
  const auto j = ojson::parse(json_text.empty() ? std::string_view("{}") : json_text);
  auto take = [&](const char* key, std::uint32_t& field) {
    if (j.contains(key)) field = j.at(key).get<std::uint32_t>();
  };
  take("n_layers", s.n_layers);
  take("hidden", s.hidden);
  take("vocab", s.vocab);
  take("ffn", s.ffn);
  take("n_experts", s.n_experts);
  take("expert_hidden", s.expert_hidden);
  take("q_heads", s.q_heads);
  take("kv_heads", s.kv_heads);
  return s;
}

ModelSpec make_model(ModelFamily family, const ModelScale& scale) {
  const std::uint64_t h = scale.hidden;
  if (h == 0 || h % (2 * kMaxTpDegree) != 0) {
    invalid("hidden " + std::to_string(h) + " must be a positive multiple of " +
            std::to_string(2 * kMaxTpDegree));
  }
  if (scale.q_heads == 0) invalid("q_heads must be positive");
  const std::uint64_t vocab = scale.vocab ? scale.vocab : 4 * h;
  const std::uint64_t ffn = scale.ffn ? scale.ffn : 4 * h;

  std::uint64_t kv_size = 0;
  if (family == ModelFamily::kGQA) {
    if (scale.kv_heads == 0 || scale.q_heads % scale.kv_heads != 0) {
      invalid("q_heads must be a positive multiple of kv_heads");
    }
    if ((h * scale.kv_heads) % scale.q_heads != 0) invalid("kv size is not integral");
    kv_size = h * scale.kv_heads / scale.q_heads;
  }
  if (family == ModelFamily::kMoE && scale.n_experts == 0) invalid("n_experts must be positive");
  const std::uint64_t expert_hidden = scale.expert_hidden ? scale.expert_hidden : 2 * h;

  ModelSpec spec;
  spec.name = std::string(model_family_name(family));
  spec.n_layers = scale.n_layers;
  const std::uint32_t last_slot = spec.layer_slots() - 1;

  auto add = [&](std::string name, Shape shape, std::uint32_t layer, ParamKind kind,
                 std::optional<std::uint32_t> hint = std::nullopt,
                 std::vector<Segment> segments = {}) {
    spec.params.push_back(ParamSpec{std::move(name), std::move(shape), layer, kind, hint,
                                    std::move(segments)});
  };
  auto blocks = [](std::uint64_t count, std::uint64_t length) {
    std::vector<Segment> segs;
    for (std::uint64_t i = 0; i < count; ++i) segs.push_back({i * length, length});
    return segs;
  };

  add("embed.weight", {vocab, h}, 0, ParamKind::kEmbedding);
  for (std::uint32_t i = 0; i < scale.n_layers; ++i) {
    const std::string p = "layers." + std::to_string(i) + ".";
    add(p + "input_norm.weight", {h}, i, ParamKind::kLayerNormWeight);
    add(p + "input_norm.bias", {h}, i, ParamKind::kLayerNormBias);
    if (family == ModelFamily::kGQA) {
      add(p + "attn.qkv.weight", {h + 2 * kv_size, h}, i, ParamKind::kFusedQKV, std::nullopt,
          {{0, h}, {h, kv_size}, {h + kv_size, kv_size}});
    } else {
      add(p + "attn.qkv.weight", {3 * h, h}, i, ParamKind::kMatmul2D, 0);
    }
    add(p + "attn.alibi_slopes", {scale.q_heads}, i, ParamKind::kAsyncPartial);
    add(p + "attn.out.weight", {h, h}, i, ParamKind::kMatmul2D, 1);
    add(p + "post_attn_norm.weight", {h}, i, ParamKind::kLayerNormWeight);
    add(p + "post_attn_norm.bias", {h}, i, ParamKind::kLayerNormBias);
    if (family == ModelFamily::kMoE) {
      const std::uint64_t e = scale.n_experts;
      add(p + "moe.experts.fc1.weight", {e * expert_hidden, h}, i,
          ParamKind::kFusedExpert3DLike, std::nullopt, blocks(e, expert_hidden));
      add(p + "moe.experts.fc2.weight", {e * h, expert_hidden}, i,
          ParamKind::kFusedExpert3DLike, std::nullopt, blocks(e, h));
    } else {
      add(p + "mlp.fc1.weight", {ffn, h}, i, ParamKind::kMatmul2D, 0);
      add(p + "mlp.fc2.weight", {h, ffn}, i, ParamKind::kMatmul2D, 1);
    }
  }
  add("head.weight", {vocab, h}, last_slot, ParamKind::kTiedEmbedding);
  spec.tied_pairs.emplace_back("embed.weight", "head.weight");
  spec.validate();
  return spec;
}

std::string model_to_json(const ModelSpec& spec) {
  ojson j;
  j["name"] = spec.name;
  j["n_layers"] = spec.n_layers;
  j["tied_pairs"] = ojson::array();
  for (const auto& [a, b] : spec.tied_pairs) j["tied_pairs"].push_back({a, b});
  j["params"] = ojson::array();
  for (const auto& p : spec.params) {
    ojson e;
    e["name"] = p.name;
    e["shape"] = p.shape;
    e["layer_index"] = p.layer_index;
    e["kind"] = param_kind_name(p.kind);
    e["tp_axis_hint"] = p.tp_axis_hint ? ojson(*p.tp_axis_hint) : ojson(nullptr);
    e["nc_segments"] = ojson::array();
    for (const auto& s : p.nc_segments) e["nc_segments"].push_back({s.offset, s.length});
    j["params"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

ModelSpec model_from_json(std::string_view text) {
  ModelSpec spec;
  try {
    const auto j = ojson::parse(text);
    spec.name = j.at("name").get<std::string>();
    spec.n_layers = j.at("n_layers").get<std::uint32_t>();
    for (const auto& t : j.at("tied_pairs")) {
      spec.tied_pairs.emplace_back(t.at(0).get<std::string>(), t.at(1).get<std::string>());
    }
    for (const auto& e : j.at("params")) {
      ParamSpec p;
      p.name = e.at("name").get<std::string>();
      p.shape = e.at("shape").get<Shape>();
      p.layer_index = e.at("layer_index").get<std::uint32_t>();
      p.kind = parse_param_kind(e.at("kind").get<std::string>());
      if (!e.at("tp_axis_hint").is_null()) p.tp_axis_hint = e.at("tp_axis_hint").get<std::uint32_t>();
      for (const auto& s : e.at("nc_segments")) {
        p.nc_segments.push_back({s.at(0).get<std::uint64_t>(), s.at(1).get<std::uint64_t>()});
      }
      spec.params.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kManifest, std::string("model.json: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace ucp
