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

#include "ucp/partitioner.hpp"

#include <set>

#include "ucp/fs_util.hpp"
#include "ucp/parallel.hpp"
#include "ucp/tensor_file.hpp"

namespace ucp {

namespace fs = std::filesystem;

const Fragment* RankShards::find(std::string_view param, StateKind state) const {
  for (const auto& f : fragments) {
    if (f.entry.param == param && f.entry.state == state) return &f;
  }
  return nullptr;
}

void check_state_matches(const ModelSpec& spec, const ModelState& state) {
  if (state.params.size() != spec.params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "state has " + std::to_string(state.params.size()) +
                                               " params, model has " +
                                               std::to_string(spec.params.size()));
  }
  for (const auto& p : spec.params) {
    auto it = state.params.find(p.name);
    if (it == state.params.end()) throw Error(ErrorCode::kShapeMismatch, "state lacks " + p.name);
    for (auto k : kStateKinds) {
      const Tensor& t = it->second.get(k);
      if (t.dtype() != DType::kF32 || t.shape() != p.shape) {
        throw Error(ErrorCode::kShapeMismatch,
                    p.name + "/" + std::string(state_kind_name(k)) + " is " +
                        std::string(dtype_name(t.dtype())) + shape_string(t.shape()));
      }
    }
  }
}

RankShards build_rank(const ModelSpec& spec, const ModelState& state, const ParallelConfig& cfg,
                      std::uint32_t rank) {
  RankShards out{rank, cfg.placement(rank), {}};
  for (auto& entry : plan_rank(spec, cfg, rank)) {
    const Tensor& full = state.params.at(entry.param).get(entry.state);
    Tensor t = materialize(full, entry);
    out.fragments.push_back({std::move(entry), std::move(t)});
  }
  return out;
}

World build_world(const ModelSpec& spec, const ModelState& state, const ParallelConfig& cfg,
                  unsigned threads) {
  cfg.validate(spec.layer_slots());
  check_state_matches(spec, state);
  World w{spec, {cfg, state.step, state.metadata}, {}};
  w.ranks.resize(cfg.world_size());
  parallel_for(w.ranks.size(), threads,
               [&](std::size_t g) { w.ranks[g] = build_rank(spec, state, cfg, g); });
  return w;
}

namespace {

void write_rank(const fs::path& out_dir, const RankShards& rank) {
  const fs::path dir = out_dir / rank_dir_name(rank.rank);
  fs::create_directories(dir);
  RankManifest manifest{rank.rank, rank.placement, {}};
  for (const auto& f : rank.fragments) {
    write_tensor(dir / f.entry.file, f.tensor);
    ShardEntry e = f.entry;
    e.dtype = f.tensor.dtype();
    e.shape = f.tensor.shape();
    manifest.shards.push_back(std::move(e));
  }
  write_text_atomic(dir / kManifestFile, rank_manifest_json(manifest));
}

void write_roots(const fs::path& out_dir, const ModelSpec& spec, const CheckpointMeta& meta) {
  write_text_atomic(out_dir / kModelFile, model_to_json(spec));
  write_text_atomic(out_dir / kConfigFile, checkpoint_meta_json(meta));
}

}  // namespace

void partition(const ModelSpec& spec, const ModelState& state, const ParallelConfig& cfg,
               const fs::path& out_dir, PartitionOptions options) {
  cfg.validate(spec.layer_slots());
  check_state_matches(spec, state);
  // Surface coverage gaps before touching the filesystem.
  for (const auto& p : spec.params) assign_pattern(spec, p, cfg);
  prepare_empty_dir(out_dir);
  parallel_for(cfg.world_size(), options.threads, [&](std::size_t g) {
    write_rank(out_dir, build_rank(spec, state, cfg, static_cast<std::uint32_t>(g)));
  });
  write_roots(out_dir, spec, {cfg, state.step, state.metadata});
}

void save_world(const World& world, const fs::path& out_dir, unsigned threads) {
  if (world.ranks.size() != world.meta.config.world_size()) {
    throw Error(ErrorCode::kInvalidArgument, "world has the wrong number of ranks");
  }
  prepare_empty_dir(out_dir);
  parallel_for(world.ranks.size(), threads,
               [&](std::size_t g) { write_rank(out_dir, world.ranks[g]); });
  write_roots(out_dir, world.spec, world.meta);
}

World read_world(const fs::path& ckpt_dir, unsigned threads) {
  World w;
  w.meta = read_checkpoint_meta(ckpt_dir);
  w.spec = model_from_json(read_text(ckpt_dir / kModelFile));
  const std::uint32_t n = w.meta.config.world_size();
  for (const auto& entry : fs::directory_iterator(ckpt_dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && name.starts_with("rank_")) {
      const auto idx = name.substr(5);
      if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos ||
          std::stoull(idx) >= n) {
        throw Error(ErrorCode::kManifest, "unexpected rank directory " + name);
      }
    }
  }
  w.ranks.resize(n);
  parallel_for(n, threads, [&](std::size_t g) {
    const fs::path dir = ckpt_dir / rank_dir_name(g);
    auto manifest = read_rank_manifest(dir);
    if (manifest.rank != g || manifest.placement != w.meta.config.placement(g)) {
      throw Error(ErrorCode::kManifest, dir.string() + ": rank/placement disagree with layout");
    }
    std::set<std::string> listed;
    for (const auto& e : manifest.shards) listed.insert(e.file);
    for (const auto& f : fs::directory_iterator(dir)) {
      const auto name = f.path().filename().string();
      if (name != kManifestFile && !listed.contains(name)) {
        throw Error(ErrorCode::kManifest, dir.string() + ": unlisted file " + name);
      }
    }
    RankShards rs{manifest.rank, manifest.placement, {}};
    for (auto& e : manifest.shards) {
      Tensor t = read_tensor(dir / e.file);
      if (t.dtype() != e.dtype || t.shape() != e.shape) {
        throw Error(ErrorCode::kManifest, dir.string() + "/" + e.file +
                                              ": header disagrees with manifest");
      }
      rs.fragments.push_back({std::move(e), std::move(t)});
    }
    w.ranks[g] = std::move(rs);
  });
  return w;
}

}  // namespace ucp
