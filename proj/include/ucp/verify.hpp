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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ucp/loader.hpp"
#include "ucp/model.hpp"
#include "ucp/parallel_config.hpp"
#include "ucp/state.hpp"
#include "ucp/trainer.hpp"

namespace ucp {

struct GridModel {
  ModelFamily family = ModelFamily::kDenseGPT;
  ModelScale scale;
};

using ConfigPair = std::pair<ParallelConfig, ParallelConfig>;

struct GridSpec {
  std::vector<GridModel> models;
  // Round trips run for every (source, target) in configs x configs that
  // the model accepts.
  std::vector<ParallelConfig> configs;
  // Train, reconfigure, train again.
  std::vector<ConfigPair> resume_pairs;
  std::vector<std::uint64_t> seeds = {1};
  TrainerConfig trainer;  // steps per phase in trainer.steps
};

// {1,2,4} x {1,2} x {1,2} x {Z0,Z1,Z3}, ZeRO-3 only at tp = pp = 1, plus the
// interleaved (v = 2) variant of every pp = 2 config.
std::vector<ParallelConfig> default_grid_configs();
std::vector<GridModel> default_grid_models();
// Six pairs, including (dp=2,pp=4,Z1) -> (dp=2,tp=2,pp=2).
std::vector<ConfigPair> default_resume_pairs();
GridSpec default_grid();

// Configs in `configs` that `spec` can be laid out under.
std::vector<ParallelConfig> compatible_configs(const ModelSpec& spec,
                                               const std::vector<ParallelConfig>& configs);

// nullopt when bit-identical; otherwise where the first difference is, as
// "param/state[i,j]: expected 0x... got 0x...".
std::optional<std::string> first_difference(const ModelState& expected, const ModelState& actual);

struct CellResult {
  std::string model;
  std::string kind;  // "roundtrip" or "resume"
  std::string src;
  std::string tgt;
  std::uint64_t seed = 0;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CellResult> cells;
  std::size_t passed() const;
  bool all_pass() const { return passed() == cells.size(); }
};

struct VerifyOptions {
  unsigned threads = 1;
  std::uint32_t convert_workers = 1;
};

// Each source is partitioned and converted once under `scratch`, then
// loaded under every target and consolidated by the oracle. Failures become
// report entries. Everything written lives under `scratch`, which must be
// empty or absent; per-source directories are removed as they finish.
VerifyReport verify_roundtrip(const GridSpec& grid, const std::filesystem::path& scratch,
                              const VerifyOptions& options = {});

// Train `trainer.steps` under src, checkpoint, resume under tgt, train as
// many again, consolidate; compare with uninterrupted training.
CellResult check_resume(const GridModel& model, const ConfigPair& pair, std::uint64_t seed,
                        const TrainerConfig& trainer, const std::filesystem::path& scratch,
                        const VerifyOptions& options = {});

std::string report_json(const VerifyReport& report);

// Flips every bit of payload byte `byte` of the tensor file. Returns the
// file's path.
std::filesystem::path inject_fault(const std::filesystem::path& rank_dir, const std::string& file,
                                   std::uint64_t byte);

struct BenchSpec {
  GridModel model;
  ParallelConfig source;
  ParallelConfig target;
  std::vector<std::uint32_t> workers = {1, 2, 4, 8};
  std::vector<std::uint32_t> inner = {1, 2};
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::string model;
  std::uint64_t params_numel = 0;
  std::uint32_t n_workers = 1;
  std::uint32_t inner = 1;
  double wall_ms_convert = 0;
  double wall_ms_load = 0;
  double speedup_vs_sequential = 1;
  bool identical_to_sequential = true;  // output tree byte-equal to row 0
};

struct BenchReport {
  std::vector<BenchRow> rows;  // row 0 is the sequential baseline
  unsigned hardware_threads = 0;
  std::string note;
};

// Partitions once, then converts and loads for workers x inner plus the
// (1, 1) baseline. Timings are from this process with a warm page cache.
BenchReport bench(const BenchSpec& spec, const std::filesystem::path& scratch);
std::string bench_csv(const BenchReport& report);
std::string bench_table(const BenchReport& report);

// True when the two trees hold the same relative paths with equal bytes.
bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace ucp
