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

#include <filesystem>

#include "ucp/partitioner.hpp"
#include "ucp/state.hpp"

namespace ucp {

// Ground truth for tests and verification. Inverts a distributed checkpoint
// by scattering every fragment element to its consolidated index, computed
// here from the manifest fields alone. Shares no code with the conversion
// engine. Replicas must agree bit-for-bit, padding must be zero, every
// element must be covered, and Partial variants are averaged in f64.
ModelState consolidate_world(const World& world);
ModelState consolidate_oracle(const std::filesystem::path& ckpt_dir);

}  // namespace ucp
