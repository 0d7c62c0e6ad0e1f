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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ucp/model.hpp"

namespace ucp {

// Reducer groups for conversion, balanced by element count.
struct WorkPlan {
  std::uint32_t n_workers = 1;
  std::vector<std::vector<std::string>> groups;  // worker -> params
  std::vector<std::uint64_t> cost;               // worker -> total numel

  std::uint64_t max_cost() const;
  // Throws kInvalidArgument for a param in no group.
  std::uint32_t worker_of(std::string_view param) const;
};

// Longest-processing-time greedy: jobs by cost descending (ties by index
// ascending), each onto the currently cheapest bin (ties to the lowest bin).
// Returns bin -> job indices in assignment order. Within 4/3 - 1/(3m) of the
// optimal makespan.
std::vector<std::vector<std::size_t>> lpt_assign(std::span<const std::uint64_t> costs,
                                                 std::uint32_t bins);

// LPT over params by numel, ties broken by param name.
WorkPlan plan_work(const ModelSpec& spec, std::uint32_t n_workers);

}  // namespace ucp
