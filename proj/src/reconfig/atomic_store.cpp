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

#include "ucp/atomic_store.hpp"

#include <cstdio>
#include <set>

#include "ucp/fs_util.hpp"
#include "ucp/hash.hpp"
#include "ucp/manifest.hpp"
#include "ucp/tensor_file.hpp"

namespace ucp {

namespace fs = std::filesystem;

fs::path atomic_file(const fs::path& root, std::string_view param, StateKind state) {
  return root / std::string(param) / (std::string(state_kind_name(state)) + ".ucpt");
}

std::string fingerprint(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_atomic_meta(const fs::path& root, const AtomicMeta& meta) {
  ojson j;
  j["format_version"] = kFormatVersion;
  j["step"] = meta.step;
  j["metadata"] = meta.metadata;
  j["source_fingerprint"] = meta.source_fingerprint;
  write_text_atomic(root / kAtomicMetaFile, j.dump(2) + "\n");
}

AtomicMeta read_atomic_meta(const fs::path& root) {
  const auto j = parse_json_document(read_text(root / kAtomicMetaFile), kAtomicMetaFile);
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorCode::kManifest, "ucp_meta.json: unsupported format_version");
    }
    return {j.at("step").get<std::uint64_t>(),
            j.at("metadata").get<std::map<std::string, double>>(),
            j.at("source_fingerprint").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kManifest, std::string("ucp_meta.json: ") + e.what());
  }
}

ModelSpec validate_atomic(const fs::path& root) {
  if (!fs::exists(root / kModelFile)) {
    throw Error(ErrorCode::kManifest, root.string() + " has no model.json");
  }
  ModelSpec spec = model_from_json(read_text(root / kModelFile));
  read_atomic_meta(root);
  std::set<std::string> expected;
  for (const auto& p : spec.params) expected.insert(p.name);
  for (const auto& entry : fs::directory_iterator(root)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory()) {
      if (!expected.contains(name)) {
        throw Error(ErrorCode::kManifest, "unexpected param directory " + name);
      }
    } else if (name != kModelFile && name != kAtomicMetaFile) {
      throw Error(ErrorCode::kManifest, "unexpected file " + name);
    }
  }
  for (const auto& p : spec.params) {
    const fs::path dir = root / p.name;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::kManifest, "missing param dir " + p.name);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& f : fs::directory_iterator(dir)) ++files;
    if (files != kStateKinds.size()) {
      throw Error(ErrorCode::kManifest, p.name + " holds " + std::to_string(files) + " files");
    }
    for (auto k : kStateKinds) {
      const Tensor t = read_tensor(atomic_file(root, p.name, k));
      if (t.dtype() != DType::kF32 || t.shape() != p.shape) {
        throw Error(ErrorCode::kShapeMismatch, p.name + "/" + std::string(state_kind_name(k)) +
                                                   " is " + std::string(dtype_name(t.dtype())) +
                                                   shape_string(t.shape()) + ", model says f32" +
                                                   shape_string(p.shape));
      }
    }
  }
  return spec;
}

ModelState read_atomic_state(const fs::path& root) {
  const ModelSpec spec = model_from_json(read_text(root / kModelFile));
  const AtomicMeta meta = read_atomic_meta(root);
  ModelState state;
  state.step = meta.step;
  state.metadata = meta.metadata;
  for (const auto& p : spec.params) {
    ParamState ps;
    for (auto k : kStateKinds) {
      ps.get(k) = read_tensor(atomic_file(root, p.name, k));
      if (ps.get(k).shape() != p.shape) {
        throw Error(ErrorCode::kShapeMismatch, p.name + " disagrees with model.json");
      }
    }
    state.params.emplace(p.name, std::move(ps));
  }
  return state;
}

void save_atomic_state(const ModelSpec& spec, const ModelState& state, const fs::path& root,
                       std::string_view source_fingerprint) {
  prepare_empty_dir(root);
  for (const auto& p : spec.params) {
    fs::create_directories(root / p.name);
    for (auto k : kStateKinds) {
      write_tensor(atomic_file(root, p.name, k), state.params.at(p.name).get(k));
    }
  }
  write_text_atomic(root / kModelFile, model_to_json(spec));
  write_atomic_meta(root, {state.step, state.metadata, std::string(source_fingerprint)});
}

}  // namespace ucp
