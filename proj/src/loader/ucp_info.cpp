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

#include <map>
#include <tuple>

#include "ucp/loader.hpp"

namespace ucp {

namespace {

bool sharded(PatternKind k) { return k != PatternKind::kUnique && k != PatternKind::kReplicate; }

}  // namespace

UcpInfo ucp_info(const ModelSpec& spec, const ParallelConfig& tgt) {
  UcpInfo info;
  info.config = tgt;
  info.ranks.resize(tgt.world_size());
  // Same rule code as the partitioner, read the other way round.
  std::map<std::tuple<std::string, StateKind, std::uint32_t, std::uint32_t>, std::uint32_t> ids;
  for (auto& e : plan_fragments(spec, tgt)) {
    const auto& p = e.pattern;
    const std::uint32_t tp_key = sharded(p.tensor.kind) ? e.placement.tp_rank : 0;
    const std::uint32_t dp_key = sharded(p.data.kind) ? e.placement.dp_rank : 0;
    const auto [it, _] = ids.try_emplace({e.param, e.state, tp_key, dp_key},
                                         static_cast<std::uint32_t>(ids.size()));
    const std::uint32_t group = e.placement.pp_rank * tgt.tp + e.placement.tp_rank;
    const std::uint32_t rank = e.rank;
    info.ranks[rank].push_back({std::move(e), it->second, group});
  }
  return info;
}

}  // namespace ucp
