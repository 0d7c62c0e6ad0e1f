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

#include <set>

#include "ucp/manifest.hpp"
#include "ucp/reconfig.hpp"
#include "ucp/tensor_file.hpp"

namespace ucp {

namespace fs = std::filesystem;

void extract(const fs::path& rank_dir, const std::function<void(FragmentMsg&&)>& sink) {
  const RankManifest manifest = read_rank_manifest(rank_dir);
  std::set<std::string> listed;
  for (const auto& e : manifest.shards) {
    if (!listed.insert(e.file).second) {
      throw Error(ErrorCode::kManifest, rank_dir.string() + ": " + e.file + " listed twice");
    }
  }
  std::set<std::string> present;
  for (const auto& f : fs::directory_iterator(rank_dir)) {
    const auto name = f.path().filename().string();
    if (name != kManifestFile) present.insert(name);
  }
  if (present != listed) {
    throw Error(ErrorCode::kManifest, rank_dir.string() + ": manifest and files disagree");
  }
  for (const auto& e : manifest.shards) {
    Tensor t = read_tensor(rank_dir / e.file);
    if (t.dtype() != e.dtype || t.shape() != e.shape) {
      throw Error(ErrorCode::kManifest, (rank_dir / e.file).string() +
                                            ": tensor header disagrees with manifest");
    }
    sink(FragmentMsg{e, std::move(t), manifest.rank});
  }
}

std::vector<FragmentMsg> extract(const fs::path& rank_dir) {
  std::vector<FragmentMsg> out;
  extract(rank_dir, [&](FragmentMsg&& m) { out.push_back(std::move(m)); });
  return out;
}

Tensor strip_pad(const Tensor& t, std::uint64_t pad_elems, const Shape& target) {
  if (t.rank() != 1 || t.numel() != numel(target) + pad_elems) {
    throw Error(ErrorCode::kShapeMismatch,
                shape_string(t.shape()) + " is not " + shape_string(target) + " plus " +
                    std::to_string(pad_elems) + " padding elements");
  }
  const std::size_t es = element_size(t.dtype());
  const auto tail = t.bytes().subspan(numel(target) * es);
  for (auto b : tail) {
    if (b != std::byte{0}) {
      throw Error(ErrorCode::kNonzeroPadding, "padding tail holds nonzero bytes");
    }
  }
  if (pad_elems == 0) return t.reshaped(target);
  return slice_flat(t, 0, numel(target)).reshaped(target);
}

}  // namespace ucp
