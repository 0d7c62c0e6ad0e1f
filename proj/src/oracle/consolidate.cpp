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

#include "ucp/oracle.hpp"

#include <cstring>
#include <map>

#include "ucp/fs_util.hpp"
#include "ucp/manifest.hpp"
#include "ucp/tensor_file.hpp"

namespace ucp {

namespace {

constexpr std::uint64_t kPad = ~0ULL;

// Consolidated flat index of fragment element j, or kPad.
class IndexMap {
 public:
  explicit IndexMap(const ShardEntry& e) : e_(e) {
    inner_ = 1;
    for (std::size_t a = 1; a < e.tp_shape.size(); ++a) inner_ *= e.tp_shape[a];
    tp_numel_ = numel(e.tp_shape);
    if (e.pattern.data.kind == PatternKind::kShardV) {
      if (!e.flat_range) throw Error(ErrorCode::kManifest, e.param + ": flat shard without range");
      flat_start_ = e.flat_range->start;
    }
  }

  std::uint64_t operator()(std::uint64_t j) const {
    const std::uint64_t q = flat_start_ + j;
    if (q >= tp_numel_) return kPad;
    if (e_.tp_shape.empty()) return q;
    const std::uint64_t row = q / inner_;
    const std::uint64_t rest = q % inner_;
    const auto& t = e_.pattern.tensor;
    const std::uint32_t tp_rank = e_.placement.tp_rank;
    switch (t.kind) {
      case PatternKind::kShardV:
        return (tp_rank * e_.tp_shape[0] + row) * inner_ + rest;
      case PatternKind::kShardH:
        return col_split(row, rest, tp_rank);
      case PatternKind::kShardHy: {
        const std::uint64_t grow = tp_rank / t.grid_cols * e_.tp_shape[0] + row;
        return col_split(grow, rest, tp_rank % t.grid_cols);
      }
      case PatternKind::kShardNC: {
        std::uint64_t local = 0;
        for (const auto& s : t.segments) {
          const std::uint64_t sub = s.length / e_.tp_degree;
          if (row < local + sub) return (s.offset + tp_rank * sub + (row - local)) * inner_ + rest;
          local += sub;
        }
        return kPad - 1;  // caught by the bounds check
      }
      default:
        return q;
    }
  }

 private:
  // Axis 1 split into equal column blocks; `block` picks the block.
  std::uint64_t col_split(std::uint64_t row, std::uint64_t rest, std::uint64_t block) const {
    const std::uint64_t after = inner_ / e_.tp_shape[1];  // elements per axis-1 step
    const std::uint64_t col = rest / after;
    const std::uint64_t tail = rest % after;
    const std::uint64_t gcol = block * e_.tp_shape[1] + col;
    return (row * e_.param_shape[1] + gcol) * after + tail;
  }

  const ShardEntry& e_;
  std::uint64_t inner_ = 1;
  std::uint64_t tp_numel_ = 0;
  std::uint64_t flat_start_ = 0;
};

struct Buffer {
  std::vector<float> values;
  std::vector<bool> written;
  std::uint64_t filled = 0;
};

struct Accumulator {
  const ParamSpec* param = nullptr;
  std::map<std::uint32_t, Buffer> variants;  // tp_rank for Partial, else 0
};

std::string who(const ShardEntry& e) {
  return e.param + "/" + std::string(state_kind_name(e.state)) + " on rank " +
         std::to_string(e.rank);
}

void scatter(Accumulator& acc, const ShardEntry& e, const Tensor& stored) {
  const Tensor t = stored.dtype() == DType::kF32 ? stored : cast(stored, DType::kF32);
  if (t.numel() != numel(e.shape)) throw Error(ErrorCode::kShapeMismatch, who(e));
  const std::uint64_t n = numel(acc.param->shape);
  const bool partial = e.pattern.tensor.kind == PatternKind::kPartial;
  Buffer& buf = acc.variants[partial ? e.placement.tp_rank : 0];
  if (buf.values.empty()) {
    buf.values.assign(n, 0.0f);
    buf.written.assign(n, false);
  }
  const IndexMap map(e);
  const auto src = t.f32();
  for (std::uint64_t j = 0; j < src.size(); ++j) {
    const std::uint64_t g = map(j);
    if (g == kPad) {
      std::uint32_t bits;
      std::memcpy(&bits, &src[j], 4);
      if (bits != 0) throw Error(ErrorCode::kNonzeroPadding, who(e));
      continue;
    }
    if (g >= n) throw Error(ErrorCode::kBounds, who(e) + ": element outside the param");
    if (buf.written[g]) {
      if (std::memcmp(&buf.values[g], &src[j], 4) != 0) {
        throw Error(ErrorCode::kReplicaMismatch, who(e) + ": replica differs at flat index " +
                                                     std::to_string(g));
      }
      continue;
    }
    buf.values[g] = src[j];
    buf.written[g] = true;
    ++buf.filled;
  }
}

ModelState finish(const ModelSpec& spec, std::map<std::pair<std::string, StateKind>, Accumulator>& accs,
                  std::uint64_t step, const std::map<std::string, double>& metadata) {
  ModelState out;
  out.step = step;
  out.metadata = metadata;
  for (const auto& p : spec.params) {
    ParamState ps;
    for (auto k : kStateKinds) {
      auto it = accs.find({p.name, k});
      if (it == accs.end()) {
        throw Error(ErrorCode::kMissingFragment, p.name + "/" + std::string(state_kind_name(k)));
      }
      const std::uint64_t n = numel(p.shape);
      std::vector<double> sum(n, -0.0);
      for (const auto& [variant, buf] : it->second.variants) {
        if (buf.filled != n) {
          throw Error(ErrorCode::kMissingFragment,
                      p.name + "/" + std::string(state_kind_name(k)) + ": " +
                          std::to_string(n - buf.filled) + " elements never written");
        }
        for (std::uint64_t i = 0; i < n; ++i) sum[i] += buf.values[i];
      }
      const double count = static_cast<double>(it->second.variants.size());
      Tensor t(DType::kF32, p.shape);
      auto dst = t.mutable_f32();
      if (count == 1) {
        const auto& only = it->second.variants.begin()->second.values;
        std::copy(only.begin(), only.end(), dst.begin());
      } else {
        for (std::uint64_t i = 0; i < n; ++i) dst[i] = static_cast<float>(sum[i] / count);
      }
      ps.get(k) = std::move(t);
    }
    out.params.emplace(p.name, std::move(ps));
  }
  return out;
}

}  // namespace

ModelState consolidate_world(const World& world) {
  std::map<std::pair<std::string, StateKind>, Accumulator> accs;
  for (const auto& r : world.ranks) {
    for (const auto& f : r.fragments) {
      auto& acc = accs[{f.entry.param, f.entry.state}];
      acc.param = &world.spec.param(f.entry.param);
      scatter(acc, f.entry, f.tensor);
    }
  }
  return finish(world.spec, accs, world.meta.step, world.meta.metadata);
}

ModelState consolidate_oracle(const std::filesystem::path& dir) {
  const ModelSpec spec = model_from_json(read_text(dir / kModelFile));
  const CheckpointMeta meta = read_checkpoint_meta(dir);
  std::map<std::pair<std::string, StateKind>, Accumulator> accs;
  for (std::uint32_t g = 0; g < meta.config.world_size(); ++g) {
    const auto rank_dir = dir / rank_dir_name(g);
    const RankManifest m = read_rank_manifest(rank_dir);
    for (const auto& e : m.shards) {
      auto& acc = accs[{e.param, e.state}];
      acc.param = &spec.param(e.param);
      scatter(acc, e, read_tensor(rank_dir / e.file));
    }
  }
  return finish(spec, accs, meta.step, meta.metadata);
}

}  // namespace ucp
