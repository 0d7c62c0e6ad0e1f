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

#include <chrono>
#include <cstdio>
#include <thread>

#include "ucp/fs_util.hpp"
#include "ucp/verify.hpp"

namespace ucp {

namespace fs = std::filesystem;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BenchReport bench(const BenchSpec& spec, const fs::path& scratch) {
  prepare_empty_dir(scratch);
  const ModelSpec model = make_model(spec.model.family, spec.model.scale);
  std::uint64_t total = 0;
  for (const auto& p : model.params) total += numel(p.shape);
  partition(model, init_state(model, spec.seed), spec.source, scratch / "dist");

  std::vector<std::pair<std::uint32_t, std::uint32_t>> runs = {{1, 1}};
  for (auto w : spec.workers) {
    for (auto i : spec.inner) runs.emplace_back(w, i);
  }

  BenchReport report;
  report.hardware_threads = std::thread::hardware_concurrency();
  report.note = "single process, warm page cache after the first run";
  const fs::path baseline = scratch / "atomic_seq";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto [w, i] = runs[r];
    const fs::path out = r == 0 ? baseline : scratch / "atomic_run";
    BenchRow row{model.name, total, w, i};
    auto t0 = std::chrono::steady_clock::now();
    ConvertOptions copt;
    copt.workers = w;
    copt.inner = i;
    convert(scratch / "dist", out, copt);
    row.wall_ms_convert = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    LoadOptions lopt;
    lopt.threads = w;
    load(out, spec.target, lopt);
    row.wall_ms_load = ms_since(t0);
    if (r > 0) {
      row.speedup_vs_sequential = report.rows.front().wall_ms_convert / row.wall_ms_convert;
      row.identical_to_sequential = same_tree(baseline, out);
      fs::remove_all(out);
    }
    report.rows.push_back(row);
  }
  return report;
}

std::string bench_csv(const BenchReport& report) {
  std::string s =
      "model,params_numel,n_workers,inner,wall_ms_convert,wall_ms_load,speedup_vs_sequential,"
      "identical\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%u,%u,%.3f,%.3f,%.3f,%d\n", r.model.c_str(),
                  static_cast<unsigned long long>(r.params_numel), r.n_workers, r.inner,
                  r.wall_ms_convert, r.wall_ms_load, r.speedup_vs_sequential,
                  r.identical_to_sequential ? 1 : 0);
    s += buf;
  }
  return s;
}

std::string bench_table(const BenchReport& report) {
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof buf, "%-10s %12s %7s %5s %12s %12s %8s %9s\n", "model", "numel",
                "workers", "inner", "convert_ms", "load_ms", "speedup", "identical");
  s += buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-10s %12llu %7u %5u %12.1f %12.1f %8.2f %9s\n",
                  r.model.c_str(), static_cast<unsigned long long>(r.params_numel), r.n_workers,
                  r.inner, r.wall_ms_convert, r.wall_ms_load, r.speedup_vs_sequential,
                  r.identical_to_sequential ? "yes" : "NO");
    s += buf;
  }
  s += "hardware threads: " + std::to_string(report.hardware_threads) + "; " + report.note + "\n";
  return s;
}

}  // namespace ucp
