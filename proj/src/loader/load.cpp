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
#include <stdexcept>

#include "ucp/atomic_store.hpp"
#include "ucp/fs_util.hpp"
#include "ucp/loader.hpp"
#include "ucp/manifest.hpp"
#include "ucp/parallel.hpp"
#include "ucp/tensor_file.hpp"

namespace ucp {

namespace fs = std::filesystem;

namespace {

struct AtomicFile {
  const ParamSpec* param;
  StateKind state;
  fs::path path;
  std::uint64_t size;
};

// One dp group's view of the target: its ranks and, per rank, where each
// (param, state) slice lands in the rank's fragment list.
struct Group {
  std::uint32_t pp_rank = 0, tp_rank = 0;
  std::vector<std::uint32_t> ranks;  // by dp_rank
  std::vector<std::map<std::pair<std::string, StateKind>, std::size_t>> slot;
  std::vector<std::vector<AtomicFile>> files_by_layer;
};

Tensor read_checked(const AtomicFile& f) {
  Tensor t = read_tensor(f.path);
  if (t.dtype() != DType::kF32 || t.shape() != f.param->shape) {
    throw Error(ErrorCode::kShapeMismatch,
                f.path.string() + " is " + std::string(dtype_name(t.dtype())) +
                    shape_string(t.shape()) + ", model.json says f32" +
                    shape_string(f.param->shape));
  }
  return t;
}

}  // namespace

LoadedWorld load(const fs::path& atomic, const ParallelConfig& tgt, const LoadOptions& options) {
  if (!fs::exists(atomic / kModelFile)) {
    throw Error(ErrorCode::kManifest, atomic.string() + " has no model.json");
  }
  const ModelSpec spec = model_from_json(read_text(atomic / kModelFile));
  const AtomicMeta meta = read_atomic_meta(atomic);
  const UcpInfo info = ucp_info(spec, tgt);
  const std::uint32_t slots = spec.layer_slots();

  LoadedWorld out;
  World& world = out.world;
  world.spec = spec;
  world.meta = {tgt, meta.step, meta.metadata};
  world.ranks.resize(tgt.world_size());
  for (std::uint32_t g = 0; g < tgt.world_size(); ++g) {
    world.ranks[g].rank = g;
    world.ranks[g].placement = tgt.placement(g);
    world.ranks[g].fragments.resize(info.ranks[g].size());
  }

  std::map<std::string, std::uint64_t> file_size;
  for (const auto& p : spec.params) {
    if (!fs::is_directory(atomic / p.name)) {
      throw Error(ErrorCode::kManifest, "atomic checkpoint has no directory for " + p.name);
    }
    for (auto k : kStateKinds) {
      const fs::path f = atomic_file(atomic, p.name, k);
      if (!fs::is_regular_file(f)) throw Error(ErrorCode::kManifest, "missing " + f.string());
      file_size[f.string()] = fs::file_size(f);
    }
  }

  std::vector<Group> groups(info.n_dp_groups());
  for (std::uint32_t gi = 0; gi < groups.size(); ++gi) {
    Group& grp = groups[gi];
    grp.pp_rank = gi / tgt.tp;
    grp.tp_rank = gi % tgt.tp;
    grp.slot.resize(tgt.dp);
    grp.files_by_layer.resize(slots);
    for (std::uint32_t d = 0; d < tgt.dp; ++d) {
      const std::uint32_t rank = tgt.rank_of({grp.pp_rank, grp.tp_rank, d});
      grp.ranks.push_back(rank);
      const auto& slices = info.ranks[rank];
      for (std::size_t i = 0; i < slices.size(); ++i) {
        grp.slot[d][{slices[i].entry.param, slices[i].entry.state}] = i;
      }
    }
    // Every rank of a dp group holds the same params, so rank 0 speaks for all.
    for (const auto& [key, _] : grp.slot[0]) {
      const ParamSpec& p = spec.param(key.first);
      const fs::path f = atomic_file(atomic, p.name, key.second);
      grp.files_by_layer[p.layer_index].push_back({&p, key.second, f, file_size.at(f.string())});
    }
    for (auto& files : grp.files_by_layer) {
      std::sort(files.begin(), files.end(), [](const AtomicFile& a, const AtomicFile& b) {
        return a.size != b.size ? a.size > b.size : a.path < b.path;
      });
    }
  }

  LoadStats& stats = out.stats;
  stats.per_rank.resize(tgt.world_size());
  stats.per_group.resize(groups.size());
  std::vector<std::uint64_t> layer_numel(slots, 0);
  for (const auto& p : spec.params) layer_numel[p.layer_index] += kStateKinds.size() * numel(p.shape);
  for (auto n : layer_numel) stats.bound = std::max(stats.bound, n * tgt.dp);

  for (std::uint32_t gi = 0; gi < groups.size(); ++gi) {
    auto& gs = stats.per_group[gi];
    gs.pp_rank = groups[gi].pp_rank;
    gs.tp_rank = groups[gi].tp_rank;
    for (const auto& files : groups[gi].files_by_layer) {
      std::uint64_t layer = 0;
      for (const auto& f : files) layer += numel(f.param->shape);
      gs.file_count += files.size();
      gs.bound = std::max(gs.bound, layer * tgt.dp);
    }
  }

  // Layer by layer; the end of each parallel_for is the layer barrier.
  for (std::uint32_t layer = 0; layer < slots; ++layer) {
    parallel_for(groups.size(), options.threads, [&](std::size_t gi) {
      const Group& grp = groups[gi];
      GroupStats& gs = stats.per_group[gi];
      std::vector<Tensor> resident;  // consolidated tensors held for this layer
      std::uint64_t resident_elems = 0;
      const auto& files = grp.files_by_layer[layer];
      for (std::size_t fi = 0; fi < files.size(); ++fi) {
        const AtomicFile& f = files[fi];
        auto count_read = [&](std::uint32_t dp_rank) {
          auto& r = stats.per_rank[grp.ranks[dp_rank]];
          ++r.files_read;
          r.bytes_read += f.size;
          ++gs.reads.files_read;
          gs.reads.bytes_read += f.size;
        };
        if (options.bypass) {
          // One reader per file, round-robin over the size-sorted list; the
          // simulated all-gather hands every peer the same buffer.
          count_read(static_cast<std::uint32_t>(fi % grp.ranks.size()));
          resident.push_back(read_checked(f));
        } else {
          for (std::uint32_t d = 0; d < grp.ranks.size(); ++d) {
            count_read(d);
            resident.push_back(read_checked(f));
          }
        }
        resident_elems += numel(f.param->shape) * grp.ranks.size();
        gs.peak_resident_elements = std::max(gs.peak_resident_elements, resident_elems);

        for (std::uint32_t d = 0; d < grp.ranks.size(); ++d) {
          const Tensor& full = options.bypass ? resident.back()
                                              : resident[resident.size() - grp.ranks.size() + d];
          const std::uint32_t rank = grp.ranks[d];
          const std::size_t at = grp.slot[d].at({f.param->name, f.state});
          ShardEntry entry = info.ranks[rank][at].entry;
          Tensor t = materialize(full, entry);
          if (f.state == StateKind::kWeight && options.dtype != DType::kF32) {
            t = cast(t, options.dtype);
            entry.dtype = options.dtype;
          }
          world.ranks[rank].fragments[at] = {std::move(entry), std::move(t)};
        }
      }
    });
  }

  for (const auto& gs : stats.per_group) {
    stats.files_read += gs.reads.files_read;
    stats.bytes_read += gs.reads.bytes_read;
    stats.peak_resident_elements = std::max(stats.peak_resident_elements, gs.peak_resident_elements);
    if (gs.peak_resident_elements > gs.bound) {
      throw std::logic_error("loader exceeded its layer-wise memory bound");
    }
  }
  if (stats.peak_resident_elements > stats.bound) {
    throw std::logic_error("loader exceeded its layer-wise memory bound");
  }
  return out;
}

std::string load_stats_json(const LoadStats& s) {
  ojson j;
  j["format_version"] = kFormatVersion;
  j["files_read"] = s.files_read;
  j["bytes_read"] = s.bytes_read;
  j["peak_resident_elements"] = s.peak_resident_elements;
  j["bound"] = s.bound;
  j["per_rank"] = ojson::array();
  for (std::size_t r = 0; r < s.per_rank.size(); ++r) {
    j["per_rank"].push_back(
        {{"rank", r}, {"files_read", s.per_rank[r].files_read}, {"bytes_read", s.per_rank[r].bytes_read}});
  }
  j["per_group"] = ojson::array();
  for (const auto& g : s.per_group) {
    j["per_group"].push_back({{"pp_rank", g.pp_rank},
                              {"tp_rank", g.tp_rank},
                              {"file_count", g.file_count},
                              {"files_read", g.reads.files_read},
                              {"bytes_read", g.reads.bytes_read},
                              {"peak_resident_elements", g.peak_resident_elements},
                              {"bound", g.bound}});
  }
  return j.dump(2) + "\n";
}

}  // namespace ucp
