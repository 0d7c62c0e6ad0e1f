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

#include "ucp/shard.hpp"

#include <algorithm>
#include <bit>

#include "ucp/hash.hpp"

namespace ucp {

namespace {

constexpr std::uint64_t kPartialSeed = 0xA5F1C0DE;

std::uint64_t partial_key(std::string_view param, StateKind state, std::uint32_t pair) {
  return stream_key(kPartialSeed, param,
                    std::string(state_kind_name(state)) + "/pair" + std::to_string(pair));
}

// direction: +1 grows |x|, -1 shrinks it, 0 leaves it.
float nudge(float x, int direction, std::uint64_t key, std::uint64_t index) {
  if (direction == 0) return x;
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(x);
  std::uint32_t mag = bits & 0x7FFFFFFFu;
  const std::uint32_t exp = mag >> 23;
  const std::uint32_t mant = mag & 0x7FFFFFu;
  if (exp == 0 || exp >= 254) return x;
  const std::uint32_t j = 1 + static_cast<std::uint32_t>(element_hash(key, index) & 7u);
  if (mant < j || mant + j > (1u << 23)) return x;
  mag = direction > 0 ? mag + j : mag - j;
  return std::bit_cast<float>((bits & 0x80000000u) | mag);
}

struct PartialRole {
  int direction = 0;
  std::uint32_t pair = 0;
};

PartialRole partial_role(std::uint32_t tp_rank, std::uint32_t tp_degree) {
  if (tp_degree <= 1) return {};
  const std::uint32_t mirror = tp_degree - 1 - tp_rank;
  if (mirror == tp_rank) return {};
  return {tp_rank < mirror ? 1 : -1, std::min(tp_rank, mirror)};
}

Shape tensor_level_shape(const Shape& full, const Pattern& p, std::uint32_t tp) {
  Shape s = full;
  switch (p.kind) {
    case PatternKind::kShardV:
    case PatternKind::kShardNC:
      s[0] /= tp;
      break;
    case PatternKind::kShardH:
      s[1] /= tp;
      break;
    case PatternKind::kShardHy:
      s[0] /= p.grid_rows;
      s[1] /= p.grid_cols;
      break;
    default:
      break;
  }
  return s;
}

}  // namespace

float partial_member(float x, std::string_view param, StateKind state, std::uint32_t tp_rank,
                     std::uint32_t tp_degree, std::uint64_t index) {
  const auto role = partial_role(tp_rank, tp_degree);
  if (role.direction == 0) return x;
  return nudge(x, role.direction, partial_key(param, state, role.pair), index);
}

std::string shard_file_name(const std::string& param, StateKind state) {
  return param + "." + std::string(state_kind_name(state)) + ".ucpt";
}

std::vector<ShardEntry> plan_rank(const ModelSpec& spec, const ParallelConfig& cfg,
                                  std::uint32_t rank) {
  if (rank >= cfg.world_size()) {
    throw Error(ErrorCode::kInvalidArgument, "rank " + std::to_string(rank) + " out of range");
  }
  const Placement where = cfg.placement(rank);
  std::vector<ShardEntry> out;
  for (const auto& p : spec.params) {
    const auto patterns = assign_pattern(spec, p, cfg);
    const auto& stages = patterns[0].stages;
    if (std::find(stages.begin(), stages.end(), where.pp_rank) == stages.end()) continue;
    for (auto state : kStateKinds) {
      const auto& pat = patterns[static_cast<std::size_t>(state)];
      ShardEntry e;
      e.param = p.name;
      e.state = state;
      e.file = shard_file_name(p.name, state);
      e.rank = rank;
      e.placement = where;
      e.pattern = pat;
      e.tp_degree = cfg.tp;
      e.dp_degree = cfg.dp;
      e.param_shape = p.shape;
      e.tp_shape = tensor_level_shape(p.shape, pat.tensor, cfg.tp);
      if (pat.data.kind == PatternKind::kShardV) {
        const auto split = zero_split(numel(e.tp_shape), cfg.dp);
        e.flat_range = split.range(where.dp_rank);
        e.padded_numel = split.padded;
        e.pad_elems = split.pad_in(where.dp_rank);
        e.shape = Shape{split.chunk};
      } else {
        e.shape = e.tp_shape;
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<ShardEntry> plan_fragments(const ModelSpec& spec, const ParallelConfig& cfg) {
  std::vector<ShardEntry> out;
  for (std::uint32_t g = 0; g < cfg.world_size(); ++g) {
    auto rank = plan_rank(spec, cfg, g);
    std::move(rank.begin(), rank.end(), std::back_inserter(out));
  }
  return out;
}

Tensor materialize(const Tensor& full, const ShardEntry& e) {
  if (full.dtype() != DType::kF32 || full.shape() != e.param_shape) {
    throw Error(ErrorCode::kShapeMismatch, e.param + ": expected f32" +
                                               shape_string(e.param_shape) + ", got " +
                                               std::string(dtype_name(full.dtype())) +
                                               shape_string(full.shape()));
  }
  const std::uint32_t r = e.placement.tp_rank;
  const std::uint32_t tp = e.tp_degree;
  const Pattern& tp_pat = e.pattern.tensor;
  Tensor t;
  switch (tp_pat.kind) {
    case PatternKind::kUnique:
    case PatternKind::kReplicate:
      t = full;
      break;
    case PatternKind::kPartial: {
      t = full;
      const auto role = partial_role(r, tp);
      if (role.direction != 0) {
        const auto key = partial_key(e.param, e.state, role.pair);
        auto v = t.mutable_f32();
        for (std::uint64_t i = 0; i < v.size(); ++i) v[i] = nudge(v[i], role.direction, key, i);
      }
      break;
    }
    case PatternKind::kShardV: {
      const auto len = full.shape()[0] / tp;
      t = slice_axis(full, 0, r * len, (r + 1) * len);
      break;
    }
    case PatternKind::kShardH: {
      const auto len = full.shape()[1] / tp;
      t = slice_axis(full, 1, r * len, (r + 1) * len);
      break;
    }
    case PatternKind::kShardHy: {
      const auto rows = full.shape()[0] / tp_pat.grid_rows;
      const auto cols = full.shape()[1] / tp_pat.grid_cols;
      const auto row_rank = r / tp_pat.grid_cols;
      const auto col_rank = r % tp_pat.grid_cols;
      t = slice_axis(slice_axis(full, 0, row_rank * rows, (row_rank + 1) * rows), 1,
                     col_rank * cols, (col_rank + 1) * cols);
      break;
    }
    case PatternKind::kShardNC: {
      std::vector<Tensor> parts;
      for (const auto& s : tp_pat.segments) {
        const auto sub = s.length / tp;
        parts.push_back(slice_axis(full, 0, s.offset + r * sub, s.offset + (r + 1) * sub));
      }
      t = concat(parts, 0);
      break;
    }
  }
  if (e.pattern.data.kind == PatternKind::kShardV) {
    const auto flat = zero_flatten(t, e.dp_degree);
    return slice_flat(flat.padded_flat, e.flat_range->start, e.flat_range->end);
  }
  return t;
}

std::vector<std::uint64_t> fragment_indices(const ShardEntry& e) {
  const Shape& full = e.param_shape;
  const std::uint64_t rows = full.empty() ? 1 : full[0];
  const std::uint64_t cols = rows == 0 ? 0 : numel(full) / rows;
  const std::uint32_t r = e.placement.tp_rank;
  const std::uint32_t tp = e.tp_degree;
  const Pattern& tp_pat = e.pattern.tensor;

  std::vector<std::uint64_t> idx;
  idx.reserve(numel(e.tp_shape));
  auto emit_block = [&](std::uint64_t row0, std::uint64_t nrows, std::uint64_t col0,
                        std::uint64_t ncols) {
    for (std::uint64_t i = row0; i < row0 + nrows; ++i) {
      for (std::uint64_t j = col0; j < col0 + ncols; ++j) idx.push_back(i * cols + j);
    }
  };
  switch (tp_pat.kind) {
    case PatternKind::kUnique:
    case PatternKind::kReplicate:
    case PatternKind::kPartial:
      emit_block(0, rows, 0, cols);
      break;
    case PatternKind::kShardV:
      emit_block(r * (rows / tp), rows / tp, 0, cols);
      break;
    case PatternKind::kShardH:
      emit_block(0, rows, r * (cols / tp), cols / tp);
      break;
    case PatternKind::kShardHy: {
      const auto br = rows / tp_pat.grid_rows;
      const auto bc = cols / tp_pat.grid_cols;
      emit_block((r / tp_pat.grid_cols) * br, br, (r % tp_pat.grid_cols) * bc, bc);
      break;
    }
    case PatternKind::kShardNC:
      for (const auto& s : tp_pat.segments) {
        const auto sub = s.length / tp;
        emit_block(s.offset + r * sub, sub, 0, cols);
      }
      break;
  }
  if (e.pattern.data.kind != PatternKind::kShardV) return idx;
  std::vector<std::uint64_t> flat;
  flat.reserve(e.flat_range->size());
  for (auto f = e.flat_range->start; f < e.flat_range->end; ++f) {
    flat.push_back(f < idx.size() ? idx[f] : kPadIndex);
  }
  return flat;
}

}  // namespace ucp
