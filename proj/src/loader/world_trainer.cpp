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

#include <functional>
#include <map>

#include "ucp/loader.hpp"
#include "ucp/parallel.hpp"

namespace ucp {

namespace {

struct Holding {
  std::uint32_t rank;
  Fragment* frag;
};

// Fragments of one param, by state kind.
using ParamHoldings = std::array<std::vector<Holding>, 3>;

void train_partial(const ParamSpec& param, const std::string& grad_key, ParamHoldings& h,
                   const TrainerConfig& cfg, std::uint64_t from, std::uint64_t n) {
  std::array<Tensor, 3> full;
  for (auto k : kStateKinds) {
    std::vector<FragmentMsg> msgs;
    for (const auto& x : h[static_cast<std::size_t>(k)]) {
      msgs.push_back({x.frag->entry, x.frag->tensor, x.rank});
    }
    full[static_cast<std::size_t>(k)] = union_fragments(param, k, std::move(msgs));
  }
  for (std::uint64_t t = from; t < from + n; ++t) {
    adam_step(full[0].mutable_f32(), full[1].mutable_f32(), full[2].mutable_f32(), 0, grad_key,
              cfg, t);
  }
  for (auto k : kStateKinds) {
    for (auto& x : h[static_cast<std::size_t>(k)]) {
      x.frag->tensor = materialize(full[static_cast<std::size_t>(k)], x.frag->entry);
    }
  }
}

// One (pp_rank, tp_rank) group of a non-Partial param. With weights
// replicated and moments flat-sharded (ZeRO-1), each dp rank updates its
// own range and the group then shares the updated weights.
void train_group(const std::string& grad_key, std::vector<Fragment*> w,
                 std::vector<Fragment*> m, std::vector<Fragment*> v, const TrainerConfig& cfg,
                 std::uint64_t from, std::uint64_t n) {
  const bool split_weights = w.front()->entry.pattern.data != m.front()->entry.pattern.data;
  Tensor merged = split_weights ? w.front()->tensor : Tensor{};
  for (std::size_t d = 0; d < w.size(); ++d) {
    const auto indices = fragment_indices(m[d]->entry);
    auto mm = m[d]->tensor.mutable_f32();
    auto vv = v[d]->tensor.mutable_f32();
    if (!split_weights) {
      auto ww = w[d]->tensor.mutable_f32();
      for (std::uint64_t t = from; t < from + n; ++t) adam_step(ww, mm, vv, indices, grad_key, cfg, t);
      continue;
    }
    const FlatRange r = *m[d]->entry.flat_range;
    const auto src = w[d]->tensor.f32();
    std::vector<float> ww(r.size(), 0.0f);
    for (std::uint64_t j = 0; j < r.size(); ++j) {
      if (indices[j] != kPadIndex) ww[j] = src[r.start + j];
    }
    for (std::uint64_t t = from; t < from + n; ++t) adam_step(ww, mm, vv, indices, grad_key, cfg, t);
    auto dst = merged.mutable_f32();
    for (std::uint64_t j = 0; j < r.size(); ++j) {
      if (indices[j] != kPadIndex) dst[r.start + j] = ww[j];
    }
  }
  if (split_weights) {
    for (auto* f : w) f->tensor = merged;
  }
}

}  // namespace

void train_world(World& world, const TrainerConfig& cfg, std::uint64_t n, unsigned threads) {
  cfg.validate();
  std::map<std::string, ParamHoldings> holdings;
  for (auto& r : world.ranks) {
    for (auto& f : r.fragments) {
      if (f.tensor.dtype() != DType::kF32) {
        throw Error(ErrorCode::kUnsupportedCast, "training needs f32 fragments; " + f.entry.param +
                                                     " is " +
                                                     std::string(dtype_name(f.tensor.dtype())));
      }
      holdings[f.entry.param][static_cast<std::size_t>(f.entry.state)].push_back({r.rank, &f});
    }
  }

  const std::uint64_t from = world.meta.step;
  std::vector<std::function<void()>> tasks;
  for (auto& [name, h] : holdings) {
    const ParamSpec& param = world.spec.param(name);
    const std::string& key = world.spec.grad_key(name);
    if (h[0].front().frag->entry.pattern.tensor.kind == PatternKind::kPartial) {
      tasks.push_back([&, &h = h] { train_partial(param, key, h, cfg, from, n); });
      continue;
    }
    // (pp_rank, tp_rank) -> per-state fragments ordered by dp_rank.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::array<std::vector<Fragment*>, 3>> groups;
    for (auto k : kStateKinds) {
      for (const auto& x : h[static_cast<std::size_t>(k)]) {
        const auto& p = x.frag->entry.placement;
        auto& slot = groups[{p.pp_rank, p.tp_rank}][static_cast<std::size_t>(k)];
        if (slot.size() <= p.dp_rank) slot.resize(p.dp_rank + 1, nullptr);
        slot[p.dp_rank] = x.frag;
      }
    }
    for (auto& [_, g] : groups) {
      for (const auto& s : g) {
        if (s.size() != g[0].size() || std::count(s.begin(), s.end(), nullptr) != 0) {
          throw Error(ErrorCode::kMissingFragment, name + ": incomplete dp group in world");
        }
      }
      tasks.push_back([&key, &cfg, from, n, g] { train_group(key, g[0], g[1], g[2], cfg, from, n); });
    }
  }
  parallel_for(tasks.size(), threads, [&](std::size_t i) { tasks[i](); });
  world.meta.step = from + n;
}

}  // namespace ucp
