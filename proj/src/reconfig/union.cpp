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

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "ucp/reconfig.hpp"

namespace ucp {

namespace {

std::string where(const ParamSpec& p, StateKind state) {
  return p.name + "/" + std::string(state_kind_name(state));
}

std::string place(const FragmentMsg& m) {
  return "rank " + std::to_string(m.source_rank) + " (pp " +
         std::to_string(m.entry.placement.pp_rank) + ", tp " +
         std::to_string(m.entry.placement.tp_rank) + ", dp " +
         std::to_string(m.entry.placement.dp_rank) + ")";
}

// Replicas are compared bit-for-bit; in lenient mode the first one wins.
const Tensor& pick_replica(const std::vector<const FragmentMsg*>& group, bool strict,
                           const std::string& what, std::string_view level) {
  if (strict) {
    for (const auto* m : group) {
      if (!(m->tensor == group.front()->tensor)) {
        throw Error(ErrorCode::kReplicaMismatch,
                    what + ": " + std::string(level) + " replica on " + place(*m) +
                        " differs from " + place(*group.front()));
      }
    }
  }
  return group.front()->tensor;
}

Tensor mean_f64(const std::vector<Tensor>& parts) {
  // -0.0 is the additive identity that keeps the sign of an all -0 column.
  std::vector<double> acc(parts.front().numel(), -0.0);
  for (const auto& p : parts) {
    const auto v = p.f32();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  Tensor out(DType::kF32, parts.front().shape());
  auto o = out.mutable_f32();
  const double n = static_cast<double>(parts.size());
  for (std::size_t i = 0; i < acc.size(); ++i) o[i] = static_cast<float>(acc[i] / n);
  return out;
}

}  // namespace

Tensor union_fragments(const ParamSpec& param, StateKind state, std::vector<FragmentMsg> msgs,
                       const UnionOptions& options) {
  const std::string what = where(param, state);
  if (msgs.empty()) throw Error(ErrorCode::kMissingFragment, what + ": no fragments");

  const ShardEntry& ref = msgs.front().entry;
  std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> seen;
  for (auto& m : msgs) {
    const ShardEntry& e = m.entry;
    if (e.param != param.name || e.state != state) {
      throw Error(ErrorCode::kInvalidArgument, what + ": got a fragment of " + e.param);
    }
    if (e.param_shape != param.shape || e.tp_shape != ref.tp_shape || !(e.pattern == ref.pattern) ||
        e.tp_degree != ref.tp_degree || e.dp_degree != ref.dp_degree) {
      throw Error(ErrorCode::kShapeMismatch, what + ": fragment on " + place(m) +
                                                 " disagrees with its peers on layout");
    }
    if (m.tensor.shape() != e.shape) {
      throw Error(ErrorCode::kShapeMismatch, what + ": payload shape on " + place(m));
    }
    if (m.tensor.dtype() != DType::kF32) m.tensor = cast(m.tensor, DType::kF32);
    const auto& s = e.pattern.stages;
    if (std::find(s.begin(), s.end(), e.placement.pp_rank) == s.end() ||
        e.placement.tp_rank >= e.tp_degree || e.placement.dp_rank >= e.dp_degree) {
      throw Error(ErrorCode::kManifest, what + ": placement outside the layout on " + place(m));
    }
    if (!seen.emplace(e.placement.pp_rank, e.placement.tp_rank, e.placement.dp_rank).second) {
      throw Error(ErrorCode::kOverlappingRange, what + ": duplicate fragment on " + place(m));
    }
  }
  if (msgs.size() != ref.fragment_count()) {
    throw Error(ErrorCode::kMissingFragment, what + ": " + std::to_string(msgs.size()) + " of " +
                                                 std::to_string(ref.fragment_count()) +
                                                 " fragments present");
  }

  // (pp_rank, tp_rank) -> fragments across dp.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<const FragmentMsg*>> by_dp;
  for (const auto& m : msgs) {
    by_dp[{m.entry.placement.pp_rank, m.entry.placement.tp_rank}].push_back(&m);
  }

  // Data level.
  std::map<std::uint32_t, std::vector<Tensor>> by_tp;  // pp_rank -> tp-ordered
  for (auto& [key, group] : by_dp) {
    std::sort(group.begin(), group.end(), [](const auto* a, const auto* b) {
      return a->entry.placement.dp_rank < b->entry.placement.dp_rank;
    });
    Tensor t;
    switch (ref.pattern.data.kind) {
      case PatternKind::kUnique:
        t = group.front()->tensor;
        break;
      case PatternKind::kReplicate:
        t = pick_replica(group, options.strict_replicate, what, "data-parallel");
        break;
      case PatternKind::kShardV: {
        std::sort(group.begin(), group.end(), [](const auto* a, const auto* b) {
          return a->entry.flat_range->start < b->entry.flat_range->start;
        });
        std::uint64_t next = 0;
        std::vector<Tensor> pieces;
        for (const auto* m : group) {
          const auto& r = m->entry.flat_range;
          if (!r || r->size() != m->tensor.numel()) {
            throw Error(ErrorCode::kManifest, what + ": bad flat range on " + place(*m));
          }
          if (r->start > next) {
            throw Error(ErrorCode::kMissingFragment,
                        what + ": flat elements [" + std::to_string(next) + "," +
                            std::to_string(r->start) + ") missing");
          }
          if (r->start < next) {
            throw Error(ErrorCode::kOverlappingRange,
                        what + ": flat range on " + place(*m) + " overlaps its predecessor");
          }
          next = r->end;
          pieces.push_back(m->tensor);
        }
        if (next != ref.padded_numel) {
          throw Error(ErrorCode::kMissingFragment, what + ": flat ranges stop at " +
                                                       std::to_string(next) + " of " +
                                                       std::to_string(ref.padded_numel));
        }
        const Tensor flat = concat(pieces, 0);
        try {
          t = strip_pad(flat, ref.padded_numel - numel(ref.tp_shape), ref.tp_shape);
        } catch (const Error& e) {
          throw Error(e.code(), what + ": " + e.message());
        }
        break;
      }
      default:
        throw Error(ErrorCode::kPatternCoverage,
                    what + ": no data-level union for " +
                        std::string(pattern_name(ref.pattern.data.kind)));
    }
    by_tp[key.first].push_back(std::move(t));
  }

  // Tensor level. by_dp iterates tp_rank ascending within each pp_rank.
  const Pattern& tp_pat = ref.pattern.tensor;
  const std::uint32_t tp = ref.tp_degree;
  std::vector<std::pair<std::uint32_t, Tensor>> per_stage;
  for (auto& [pp_rank, parts] : by_tp) {
    Tensor t;
    switch (tp_pat.kind) {
      case PatternKind::kUnique:
        t = parts.front();
        break;
      case PatternKind::kReplicate:
        if (options.strict_replicate) {
          for (std::uint32_t r = 1; r < parts.size(); ++r) {
            if (!(parts[r] == parts.front())) {
              throw Error(ErrorCode::kReplicaMismatch,
                          what + ": tensor-parallel replica on stage " + std::to_string(pp_rank) +
                              " tp " + std::to_string(r) + " differs from tp 0");
            }
          }
        }
        t = parts.front();
        break;
      case PatternKind::kPartial:
        t = mean_f64(parts);
        break;
      case PatternKind::kShardV:
        t = concat(parts, 0);
        break;
      case PatternKind::kShardH:
        t = concat(parts, 1);
        break;
      case PatternKind::kShardHy: {
        std::vector<Tensor> rows;
        for (std::uint32_t row = 0; row < tp_pat.grid_rows; ++row) {
          std::span<const Tensor> blocks(parts.data() + row * tp_pat.grid_cols, tp_pat.grid_cols);
          rows.push_back(concat(blocks, 1));
        }
        t = concat(rows, 0);
        break;
      }
      case PatternKind::kShardNC: {
        std::vector<Tensor> segments;
        std::uint64_t offset_in_piece = 0;
        for (const auto& seg : tp_pat.segments) {
          const std::uint64_t sub = seg.length / tp;
          std::vector<Tensor> pieces;
          for (const auto& part : parts) {
            pieces.push_back(slice_axis(part, 0, offset_in_piece, offset_in_piece + sub));
          }
          segments.push_back(concat(pieces, 0));
          offset_in_piece += sub;
        }
        t = concat(segments, 0);
        break;
      }
    }
    per_stage.emplace_back(pp_rank, std::move(t));
  }

  // Pipeline level.
  if (ref.pattern.pipeline.kind == PatternKind::kReplicate && options.strict_replicate) {
    for (const auto& [pp_rank, t] : per_stage) {
      if (!(t == per_stage.front().second)) {
        throw Error(ErrorCode::kReplicaMismatch, what + ": pipeline replica on stage " +
                                                     std::to_string(pp_rank) + " differs");
      }
    }
  }
  Tensor out = std::move(per_stage.front().second);
  if (out.shape() != param.shape) {
    throw Error(ErrorCode::kShapeMismatch,
                what + ": assembled " + shape_string(out.shape()) + ", expected " +
                    shape_string(param.shape));
  }
  return out;
}

}  // namespace ucp
