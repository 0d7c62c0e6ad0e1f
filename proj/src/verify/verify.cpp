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

#include "ucp/verify.hpp"

#include "ucp/atomic_store.hpp"
#include "ucp/fs_util.hpp"
#include "ucp/manifest.hpp"
#include "ucp/oracle.hpp"

namespace ucp {

namespace fs = std::filesystem;

std::size_t VerifyReport::passed() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.pass ? 1 : 0;
  return n;
}

namespace {

std::string model_label(const ModelSpec& spec) { return spec.name; }

}  // namespace

VerifyReport verify_roundtrip(const GridSpec& grid, const fs::path& scratch,
                              const VerifyOptions& options) {
  prepare_empty_dir(scratch);
  VerifyReport report;
  ConvertOptions copt;
  copt.workers = options.convert_workers;
  LoadOptions lopt;
  lopt.threads = options.threads;

  for (const auto& model : grid.models) {
    const ModelSpec spec = make_model(model.family, model.scale);
    const auto configs = compatible_configs(spec, grid.configs);
    for (const auto seed : grid.seeds) {
      const ModelState state = init_state(spec, seed);
      for (std::size_t i = 0; i < configs.size(); ++i) {
        const ParallelConfig& src = configs[i];
        const fs::path dir = scratch / (spec.name + "-" + std::to_string(seed) + "-" + std::to_string(i));
        std::string source_failure;
        try {
          partition(spec, state, src, dir / "dist", {options.threads});
          if (auto d = first_difference(state, consolidate_oracle(dir / "dist"))) {
            source_failure = "oracle on source: " + *d;
          } else {
            convert(dir / "dist", dir / "atomic", copt);
            if (auto d2 = first_difference(state, read_atomic_state(dir / "atomic"))) {
              source_failure = "atomic checkpoint: " + *d2;
            }
          }
        } catch (const std::exception& e) {
          source_failure = e.what();
        }
        for (const auto& tgt : configs) {
          CellResult cell{spec.name, "roundtrip", src.to_string(), tgt.to_string(), seed, false, {}};
          if (!source_failure.empty()) {
            cell.detail = source_failure;
            report.cells.push_back(std::move(cell));
            continue;
          }
          try {
            const LoadedWorld loaded = load(dir / "atomic", tgt, lopt);
            if (auto d = first_difference(state, consolidate_world(loaded.world))) {
              cell.detail = *d;
            } else if (!(loaded.world == build_world(spec, state, tgt, options.threads))) {
              cell.detail = "loaded shards differ from a direct partition";
            } else {
              cell.pass = true;
            }
          } catch (const std::exception& e) {
            cell.detail = e.what();
          }
          report.cells.push_back(std::move(cell));
        }
        fs::remove_all(dir);
      }
      for (std::size_t i = 0; i < grid.resume_pairs.size(); ++i) {
        const auto& pair = grid.resume_pairs[i];
        if (compatible_configs(spec, {pair.first, pair.second}).size() != 2) continue;
        const fs::path dir =
            scratch / (spec.name + "-" + std::to_string(seed) + "-resume" + std::to_string(i));
        report.cells.push_back(check_resume(model, pair, seed, grid.trainer, dir, options));
        fs::remove_all(dir);
      }
    }
  }
  return report;
}

CellResult check_resume(const GridModel& model, const ConfigPair& pair, std::uint64_t seed,
                        const TrainerConfig& trainer, const fs::path& scratch,
                        const VerifyOptions& options) {
  const ModelSpec spec = make_model(model.family, model.scale);
  CellResult cell{model_label(spec), "resume", pair.first.to_string(), pair.second.to_string(),
                  seed, false, {}};
  try {
    const ModelState s0 = init_state(spec, seed);
    const std::uint64_t n = trainer.steps;
    World world = build_world(spec, s0, pair.first, options.threads);
    train_world(world, trainer, n, options.threads);
    save_world(world, scratch / "ckpt", options.threads);

    ResumeOptions ropt;
    ropt.convert.workers = options.convert_workers;
    ropt.load.threads = options.threads;
    ResumeResult resumed = resume(scratch / "ckpt", pair.second, scratch / "atomic", ropt);
    train_world(resumed.loaded.world, trainer, n, options.threads);

    const ModelState expected = train_steps(spec, s0, trainer, 0, 2 * n, options.threads);
    if (auto d = first_difference(expected, consolidate_world(resumed.loaded.world))) {
      cell.detail = *d;
    } else {
      cell.pass = true;
    }
  } catch (const std::exception& e) {
    cell.detail = e.what();
  }
  return cell;
}

std::string report_json(const VerifyReport& report) {
  ojson j;
  j["format_version"] = kFormatVersion;
  j["cells"] = report.cells.size();
  j["passed"] = report.passed();
  j["failures"] = ojson::array();
  for (const auto& c : report.cells) {
    if (c.pass) continue;
    j["failures"].push_back({{"model", c.model},
                             {"kind", c.kind},
                             {"src", c.src},
                             {"tgt", c.tgt},
                             {"seed", c.seed},
                             {"detail", c.detail}});
  }
  return j.dump(2) + "\n";
}

}  // namespace ucp
