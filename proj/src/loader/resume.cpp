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

#include "ucp/loader.hpp"
#include "ucp/manifest.hpp"

namespace ucp {

ResumeResult resume(const std::filesystem::path& ckpt, const ParallelConfig& tgt,
                    const std::filesystem::path& scratch, const ResumeOptions& options) {
  const CheckpointMeta meta = read_checkpoint_meta(ckpt);
  ResumeResult result;
  if (meta.config == tgt && !options.force_convert) {
    // Lazy path: nothing changed, so the rank files are already the answer.
    result.loaded.world = read_world(ckpt, options.load.threads);
    if (options.load.dtype != DType::kF32) {
      for (auto& r : result.loaded.world.ranks) {
        for (auto& f : r.fragments) {
          if (f.entry.state != StateKind::kWeight || f.entry.dtype == options.load.dtype) continue;
          f.tensor = cast(f.tensor, options.load.dtype);
          f.entry.dtype = options.load.dtype;
        }
      }
    }
    return result;
  }
  convert(ckpt, scratch, options.convert);
  result.loaded = load(scratch, tgt, options.load);
  result.converted = true;
  return result;
}

}  // namespace ucp
