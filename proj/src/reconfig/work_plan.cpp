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

#include "ucp/work_plan.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <tuple>

namespace ucp {

std::uint64_t WorkPlan::max_cost() const {
  return cost.empty() ? 0 : *std::max_element(cost.begin(), cost.end());
}

std::uint32_t WorkPlan::worker_of(std::string_view param) const {
  for (std::uint32_t w = 0; w < groups.size(); ++w) {
    if (std::find(groups[w].begin(), groups[w].end(), param) != groups[w].end()) return w;
  }
  throw Error(ErrorCode::kInvalidArgument, "param '" + std::string(param) + "' is unplanned");
}

std::vector<std::vector<std::size_t>> lpt_assign(std::span<const std::uint64_t> costs,
                                                 std::uint32_t bins) {
  if (bins == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one worker");
  std::vector<std::size_t> order(costs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return costs[a] > costs[b]; });

  // (load, bin) min-heap; ties go to the lower bin.
  using Slot = std::pair<std::uint64_t, std::uint32_t>;
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> heap;
  for (std::uint32_t b = 0; b < bins; ++b) heap.emplace(0, b);

  std::vector<std::vector<std::size_t>> out(bins);
  for (auto job : order) {
    auto [load, bin] = heap.top();
    heap.pop();
    out[bin].push_back(job);
    heap.emplace(load + costs[job], bin);
  }
  return out;
}

WorkPlan plan_work(const ModelSpec& spec, std::uint32_t n_workers) {
  std::vector<const ParamSpec*> params;
  for (const auto& p : spec.params) params.push_back(&p);
  std::sort(params.begin(), params.end(),
            [](const ParamSpec* a, const ParamSpec* b) { return a->name < b->name; });
  std::vector<std::uint64_t> costs;
  for (const auto* p : params) costs.push_back(numel(p->shape));

  WorkPlan plan;
  plan.n_workers = n_workers;
  const auto bins = lpt_assign(costs, n_workers);
  for (const auto& bin : bins) {
    auto& group = plan.groups.emplace_back();
    std::uint64_t total = 0;
    for (auto job : bin) {
      group.push_back(params[job]->name);
      total += costs[job];
    }
    plan.cost.push_back(total);
  }
  return plan;
}

}  // namespace ucp
