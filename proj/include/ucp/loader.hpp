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
#include <vector>

#include "ucp/partitioner.hpp"
#include "ucp/reconfig.hpp"
#include "ucp/trainer.hpp"

namespace ucp {

// Where one target rank's fragment of one (param, state) comes from. The
// entry is exactly what the partitioner would write for that rank, so it
// carries the axis ranges (via placement and pattern), NC segments, flat
// range and padding to re-add.
struct SliceAssignment {
  ShardEntry entry;
  // Ranks with the same id hold bit-identical fragments.
  std::uint32_t replication_group = 0;
  // Ranks sharing (pp_rank, tp_rank); the unit of redundancy bypassing.
  std::uint32_t dp_group = 0;
};

// The atomic -> target mapping.
struct UcpInfo {
  ParallelConfig config;
  std::vector<std::vector<SliceAssignment>> ranks;  // rank -> slices in plan order

  std::uint32_t n_dp_groups() const { return config.pp * config.tp; }
};

UcpInfo ucp_info(const ModelSpec& spec, const ParallelConfig& tgt);

struct LoadOptions {
  DType dtype = DType::kF32;  // weights only; moments stay f32
  // Read each atomic file once per dp group and share it in memory. Off:
  // every rank reads every file it needs itself.
  bool bypass = true;
  unsigned threads = 1;
};

struct ReadCounters {
  std::uint64_t files_read = 0;
  std::uint64_t bytes_read = 0;
};

struct GroupStats {
  std::uint32_t pp_rank = 0;
  std::uint32_t tp_rank = 0;
  std::uint64_t file_count = 0;  // atomic files the group needs
  ReadCounters reads;
  std::uint64_t peak_resident_elements = 0;
  std::uint64_t bound = 0;
};

struct LoadStats {
  std::uint64_t files_read = 0;
  std::uint64_t bytes_read = 0;
  // Largest number of consolidated elements any dp group held at once,
  // counting one logical copy per rank after the in-memory all-gather.
  std::uint64_t peak_resident_elements = 0;
  // max over layers of (consolidated elements of the layer, all three
  // states) x dp. peak_resident_elements never exceeds it.
  std::uint64_t bound = 0;
  std::vector<ReadCounters> per_rank;
  std::vector<GroupStats> per_group;
};

struct LoadedWorld {
  World world;
  LoadStats stats;
};

// Loads an atomic checkpoint into the target rank set, layer by layer.
// Throws kManifest for a missing param directory or file and
// kShapeMismatch when a tensor disagrees with model.json.
LoadedWorld load(const std::filesystem::path& atomic, const ParallelConfig& tgt,
                 const LoadOptions& options = {});

std::string load_stats_json(const LoadStats& stats);

struct ResumeOptions {
  // Take the conversion path even when the target equals the source.
  bool force_convert = false;
  ConvertOptions convert;
  LoadOptions load;
};

struct ResumeResult {
  LoadedWorld loaded;
  bool converted = false;
};

// Target equal to the source config: the rank files are read as they are
// and `scratch` is not touched. Otherwise converts into `scratch` (which
// must be empty or absent) and loads from there.
ResumeResult resume(const std::filesystem::path& ckpt, const ParallelConfig& tgt,
                    const std::filesystem::path& scratch, const ResumeOptions& options = {});

// Trains a world in place for `n` steps, each rank on its own fragments.
// Gradients depend only on (param, step, index), so the result consolidates
// to train_steps on the consolidated state. Partial params are reconciled to
// their mean, stepped, and re-materialized. Requires f32 fragments.
void train_world(World& world, const TrainerConfig& cfg, std::uint64_t n, unsigned threads = 1);

}  // namespace ucp
