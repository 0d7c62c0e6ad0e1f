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

#include "ucp/pattern.hpp"

#include <algorithm>
#include <set>

#include "ucp/layout.hpp"

namespace ucp {

namespace {

constexpr std::pair<PatternKind, std::string_view> kPatternNames[] = {
    {PatternKind::kUnique, "Unique"},   {PatternKind::kReplicate, "Replicate"},
    {PatternKind::kPartial, "Partial"}, {PatternKind::kShardV, "ShardV"},
    {PatternKind::kShardH, "ShardH"},   {PatternKind::kShardHy, "ShardHy"},
    {PatternKind::kShardNC, "ShardNC"},
};

[[noreturn]] void gap(const ParamSpec& p, const ParallelConfig& cfg, const std::string& why) {
  throw Error(ErrorCode::kPatternCoverage, p.name + " (" + std::string(param_kind_name(p.kind)) +
                                               " " + shape_string(p.shape) + ") under " +
                                               cfg.to_string() + ": " + why);
}

void require_divisible(const ParamSpec& p, const ParallelConfig& cfg, std::size_t axis,
                       std::uint64_t parts) {
  if (p.shape.size() <= axis) gap(p, cfg, "no axis " + std::to_string(axis) + " to shard");
  if (p.shape[axis] % parts != 0) {
    gap(p, cfg, "axis " + std::to_string(axis) + " not divisible by " + std::to_string(parts));
  }
}

Pattern only(PatternKind kind) {
  Pattern p;
  p.kind = kind;
  return p;
}

Pattern tensor_pattern(const ParamSpec& p, const ParallelConfig& cfg) {
  if (cfg.tp == 1) return {};
  switch (p.kind) {
    case ParamKind::kLayerNormWeight:
    case ParamKind::kLayerNormBias:
      return only(PatternKind::kReplicate);
    case ParamKind::kAsyncPartial:
      return only(PatternKind::kPartial);
    case ParamKind::kEmbedding:
    case ParamKind::kTiedEmbedding:
      require_divisible(p, cfg, 0, cfg.tp);
      return only(PatternKind::kShardV);
    case ParamKind::kMatmul2D: {
      if (p.shape.size() != 2) gap(p, cfg, "matmul must be 2-D");
      if (cfg.tp_rows > 1) {
        const std::uint32_t cols = cfg.tp / cfg.tp_rows;
        require_divisible(p, cfg, 0, cfg.tp_rows);
        require_divisible(p, cfg, 1, cols);
        return {PatternKind::kShardHy, {}, cfg.tp_rows, cols};
      }
      if (!p.tp_axis_hint) gap(p, cfg, "matmul without a tp axis hint");
      if (*p.tp_axis_hint == 0) {
        require_divisible(p, cfg, 0, cfg.tp);
        return only(PatternKind::kShardV);
      }
      if (*p.tp_axis_hint == 1) {
        require_divisible(p, cfg, 1, cfg.tp);
        return only(PatternKind::kShardH);
      }
      gap(p, cfg, "tp axis hint must be 0 or 1");
    }
    case ParamKind::kFusedQKV:
    case ParamKind::kFusedExpert3DLike: {
      if (p.nc_segments.empty()) gap(p, cfg, "fused param without segments");
      for (const auto& s : p.nc_segments) {
        if (s.length % cfg.tp != 0) {
          gap(p, cfg, "segment of " + std::to_string(s.length) + " rows not divisible by tp");
        }
      }
      return {PatternKind::kShardNC, p.nc_segments};
    }
  }
  gap(p, cfg, "unknown param kind");
}

Pattern data_pattern(StateKind kind, const ParallelConfig& cfg) {
  if (cfg.dp == 1) return {};
  switch (cfg.zero) {
    case ZeroStage::kZ0:
      return only(PatternKind::kReplicate);
    case ZeroStage::kZ1:
      return only(kind == StateKind::kWeight ? PatternKind::kReplicate : PatternKind::kShardV);
    case ZeroStage::kZ3:
      return only(PatternKind::kShardV);
  }
  return {};
}

}  // namespace

std::string_view pattern_name(PatternKind kind) {
  for (auto [k, n] : kPatternNames) {
    if (k == kind) return n;
  }
  return "?";
}

PatternKind parse_pattern(std::string_view name) {
  for (auto [k, n] : kPatternNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::kManifest, "unknown pattern '" + std::string(name) + "'");
}

PatternKind StackedPattern::summary() const {
  if (data.kind != PatternKind::kUnique) return data.kind;
  if (tensor.kind != PatternKind::kUnique) return tensor.kind;
  return pipeline.kind;
}

std::array<StackedPattern, 3> assign_pattern(const ModelSpec& spec, const ParamSpec& param,
                                             const ParallelConfig& cfg) {
  cfg.validate(spec.layer_slots());
  const auto stage_of = stage_of_layers(spec.layer_slots(), cfg.pp, cfg.schedule);
  std::set<std::uint32_t> stages;
  for (const auto& member : spec.tied_group(param.name)) {
    stages.insert(stage_of.at(spec.param(member).layer_index));
  }
  Pattern pipeline = only(stages.size() > 1 ? PatternKind::kReplicate : PatternKind::kUnique);
  const Pattern tensor = tensor_pattern(param, cfg);

  std::array<StackedPattern, 3> out;
  for (auto kind : kStateKinds) {
    auto& sp = out[static_cast<std::size_t>(kind)];
    sp.pipeline = pipeline;
    sp.tensor = tensor;
    sp.data = data_pattern(kind, cfg);
    sp.stages.assign(stages.begin(), stages.end());
  }
  return out;
}

}  // namespace ucp
