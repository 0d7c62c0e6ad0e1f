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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "ucp/model.hpp"
#include "ucp/state.hpp"
#include "ucp/tensor.hpp"

namespace ucp {

// Atomic checkpoint layout:
//   model.json
//   ucp_meta.json           step, metadata, source_fingerprint, format_version
//   <param>/weight.ucpt     f32, exactly the param's shape
//   <param>/adam_m.ucpt
//   <param>/adam_v.ucpt
// Nothing in the tree records ranks or partitioning.
inline constexpr std::string_view kAtomicMetaFile = "ucp_meta.json";

struct AtomicMeta {
  std::uint64_t step = 0;
  std::map<std::string, double> metadata;
  std::string source_fingerprint;

  friend bool operator==(const AtomicMeta&, const AtomicMeta&) = default;
};

std::filesystem::path atomic_file(const std::filesystem::path& root, std::string_view param,
                                  StateKind state);

// FNV-1a 64 of the bytes, as 16 lowercase hex digits.
std::string fingerprint(std::string_view bytes);

void write_atomic_meta(const std::filesystem::path& root, const AtomicMeta& meta);
AtomicMeta read_atomic_meta(const std::filesystem::path& root);

// Checks the tree against its model.json: the param directory set matches
// exactly, each holds exactly the three files, each tensor is f32 with the
// param's shape. Returns the ModelSpec.
ModelSpec validate_atomic(const std::filesystem::path& root);

// Reads every atomic tensor into a ModelState.
ModelState read_atomic_state(const std::filesystem::path& root);

// Writes an atomic checkpoint straight from a consolidated state.
void save_atomic_state(const ModelSpec& spec, const ModelState& state,
                       const std::filesystem::path& root, std::string_view source_fingerprint);

}  // namespace ucp
