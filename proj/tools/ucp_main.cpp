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

// ucp: partition, convert, load, resume, verify, bench and inspect
// checkpoints. Exit status is 0 iff every requested check passed.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ucp/atomic_store.hpp"
#include "ucp/fs_util.hpp"
#include "ucp/loader.hpp"
#include "ucp/manifest.hpp"
#include "ucp/oracle.hpp"
#include "ucp/partitioner.hpp"
#include "ucp/tensor_file.hpp"
#include "ucp/verify.hpp"

namespace fs = std::filesystem;

namespace {

struct ModelArgs {
  std::string family = "dense";
  std::string scale_file;
  std::uint32_t layers = 4;
  std::uint32_t hidden = 64;

  void add(CLI::App* app) {
    app->add_option("--model", family, "dense, moe or gqa")->capture_default_str();
    app->add_option("--scale", scale_file, "JSON file with ModelScale fields");
    app->add_option("--layers", layers)->capture_default_str();
    app->add_option("--hidden", hidden)->capture_default_str();
  }

  ucp::GridModel model() const {
    ucp::GridModel m;
    m.family = ucp::parse_model_family(family);
    if (!scale_file.empty()) {
      m.scale = ucp::parse_model_scale(ucp::read_text(scale_file));
    } else {
      m.scale.n_layers = layers;
      m.scale.hidden = hidden;
    }
    return m;
  }
};

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    ucp::write_text_atomic(path, text);
  }
}

int inspect(const fs::path& path) {
  if (fs::is_directory(path) && fs::exists(path / ucp::kAtomicMetaFile)) {
    std::cout << ucp::read_text(path / ucp::kAtomicMetaFile);
    for (const auto& p : ucp::validate_atomic(path).params) {
      std::cout << p.name << " " << ucp::shape_string(p.shape) << "\n";
    }
    return 0;
  }
  if (fs::is_directory(path)) {
    for (auto name : {ucp::kConfigFile, ucp::kAtomicMetaFile, ucp::kManifestFile}) {
      if (fs::exists(path / name)) return inspect(path / name);
    }
    throw ucp::Error(ucp::ErrorCode::kManifest, path.string() + " holds no manifest or meta file");
  }
  if (path.extension() == ".ucpt") {
    const ucp::Tensor t = ucp::read_tensor(path);
    std::cout << path.string() << ": " << ucp::dtype_name(t.dtype()) << ucp::shape_string(t.shape())
              << ", " << t.byte_size() << " payload bytes\n";
    return 0;
  }
  std::cout << ucp::parse_json_document(ucp::read_text(path), path.string()).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Universal checkpoint tools: reshard training state across parallel layouts"};
  app.require_subcommand(1);
  int status = 0;

  // partition
  ModelArgs part_model;
  std::string part_cfg = "1,1,1,1,z0,seq", part_out;
  std::uint64_t part_seed = 1, part_steps = 0;
  unsigned part_threads = 1;
  auto* part = app.add_subcommand("partition", "Write a distributed checkpoint of a synthetic model");
  part_model.add(part);
  part->add_option("--config", part_cfg, "dp,tp,pp,sp,z{0,1,3},seq|int<v>[,rows<n>]")
      ->capture_default_str();
  part->add_option("--seed", part_seed)->capture_default_str();
  part->add_option("--steps", part_steps, "Adam steps to train before saving")->capture_default_str();
  part->add_option("--out", part_out)->required();
  part->add_option("--threads", part_threads)->capture_default_str();
  part->callback([&] {
    const auto gm = part_model.model();
    const auto spec = ucp::make_model(gm.family, gm.scale);
    ucp::ModelState s = ucp::init_state(spec, part_seed);
    if (part_steps > 0) {
      ucp::TrainerConfig tc;
      s = ucp::train_steps(spec, std::move(s), tc, 0, part_steps, part_threads);
    }
    ucp::partition(spec, s, ucp::ParallelConfig::parse(part_cfg), part_out, {part_threads});
    std::cout << "wrote " << part_out << " (" << spec.params.size() << " params)\n";
  });

  // convert
  std::string conv_src, conv_out;
  ucp::ConvertOptions conv_opt;
  auto* conv = app.add_subcommand("convert", "Distributed checkpoint to atomic checkpoint");
  conv->add_option("--src", conv_src)->required();
  conv->add_option("--out", conv_out)->required();
  conv->add_option("--workers", conv_opt.workers)->capture_default_str();
  conv->add_option("--inner", conv_opt.inner)->capture_default_str();
  conv->add_option("--strict-replicate", conv_opt.strict_replicate,
                   "Compare replicas bit-for-bit; false takes the first")
      ->capture_default_str();
  conv->callback([&] {
    const auto stats = ucp::convert(conv_src, conv_out, conv_opt);
    std::cout << "wrote " << stats.params_written << " params from " << stats.messages_consumed
              << " fragments, max group cost " << stats.plan.max_cost() << "\n";
  });

  // load
  std::string load_atomic, load_cfg, load_dtype = "f32", load_stats;
  bool load_no_bypass = false;
  unsigned load_threads = 1;
  auto* ld = app.add_subcommand("load", "Load an atomic checkpoint under a target layout");
  ld->add_option("--atomic", load_atomic)->required();
  ld->add_option("--config", load_cfg)->required();
  ld->add_option("--dtype", load_dtype)->capture_default_str();
  ld->add_option("--stats", load_stats, "Stats JSON path, - for stdout")->capture_default_str();
  ld->add_flag("--no-bypass", load_no_bypass, "Every rank reads its own files");
  ld->add_option("--threads", load_threads)->capture_default_str();
  ld->callback([&] {
    ucp::LoadOptions o;
    o.dtype = ucp::parse_dtype(load_dtype);
    o.bypass = !load_no_bypass;
    o.threads = load_threads;
    const auto loaded = ucp::load(load_atomic, ucp::ParallelConfig::parse(load_cfg), o);
    write_or_print(load_stats, ucp::load_stats_json(loaded.stats));
  });

  // resume
  std::string res_src, res_cfg, res_scratch, res_out;
  bool res_force = false;
  auto* res = app.add_subcommand("resume", "Load a distributed checkpoint under a new layout");
  res->add_option("--src", res_src)->required();
  res->add_option("--config", res_cfg)->required();
  res->add_option("--scratch", res_scratch)->required();
  res->add_option("--out", res_out, "Write the resumed world as a distributed checkpoint");
  res->add_flag("--force-convert", res_force);
  res->callback([&] {
    ucp::ResumeOptions o;
    o.force_convert = res_force;
    const auto r = ucp::resume(res_src, ucp::ParallelConfig::parse(res_cfg), res_scratch, o);
    std::cout << (r.converted ? "converted and loaded" : "loaded directly, no conversion") << " ("
              << r.loaded.world.ranks.size() << " ranks)\n";
    if (!res_out.empty()) ucp::save_world(r.loaded.world, res_out);
  });

  // verify
  std::string ver_scratch, ver_report, ver_ckpt;
  std::uint64_t ver_steps = 100, ver_seed = 1;
  bool ver_quick = false;
  auto* ver = app.add_subcommand("verify", "Run the round-trip grid, or check one checkpoint");
  ver->add_option("--scratch", ver_scratch)->required();
  ver->add_option("--report", ver_report, "Report JSON path, - for stdout")->capture_default_str();
  ver->add_option("--steps", ver_steps, "Steps per phase of the resume check")->capture_default_str();
  ver->add_option("--seed", ver_seed)->capture_default_str();
  ver->add_flag("--quick", ver_quick, "Dense model only, fewer steps");
  ver->add_option("--ckpt", ver_ckpt, "Check that this checkpoint's oracle and converted forms agree");
  ver->callback([&] {
    if (!ver_ckpt.empty()) {
      const auto expected = ucp::consolidate_oracle(ver_ckpt);
      ucp::convert(ver_ckpt, ver_scratch);
      const auto diff = ucp::first_difference(expected, ucp::read_atomic_state(ver_scratch));
      std::cout << (diff ? "FAIL " + *diff : std::string("PASS")) << "\n";
      if (diff) status = 1;
      return;
    }
    ucp::GridSpec grid = ucp::default_grid();
    grid.seeds = {ver_seed};
    grid.trainer.steps = ver_steps;
    if (ver_quick) grid.models.resize(1);
    const auto report = ucp::verify_roundtrip(grid, ver_scratch);
    write_or_print(ver_report, ucp::report_json(report));
    std::cerr << report.passed() << "/" << report.cells.size() << " cells pass\n";
    if (!report.all_pass()) status = 1;
  });

  // bench
  ModelArgs bench_model;
  ucp::BenchSpec bench_spec;
  std::string bench_src = "2,2,2,1,z1,seq", bench_tgt = "4,1,1,1,z3,seq", bench_scratch, bench_csv;
  auto* bn = app.add_subcommand("bench", "Time conversion and loading over worker counts");
  bench_model.add(bn);
  bn->add_option("--src-config", bench_src)->capture_default_str();
  bn->add_option("--tgt-config", bench_tgt)->capture_default_str();
  bn->add_option("--workers", bench_spec.workers)->delimiter(',');
  bn->add_option("--inner", bench_spec.inner)->delimiter(',');
  bn->add_option("--scratch", bench_scratch)->required();
  bn->add_option("--csv", bench_csv, "CSV path");
  bn->callback([&] {
    bench_spec.model = bench_model.model();
    bench_spec.source = ucp::ParallelConfig::parse(bench_src);
    bench_spec.target = ucp::ParallelConfig::parse(bench_tgt);
    const auto report = ucp::bench(bench_spec, bench_scratch);
    std::cout << ucp::bench_table(report);
    if (!bench_csv.empty()) ucp::write_text_atomic(bench_csv, ucp::bench_csv(report));
    for (const auto& r : report.rows) {
      if (!r.identical_to_sequential) status = 1;
    }
  });

  // inspect
  std::string insp_path;
  auto* insp = app.add_subcommand("inspect", "Pretty-print a manifest, meta JSON or tensor header");
  insp->add_option("path", insp_path)->required();
  insp->callback([&] { status = inspect(insp_path); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; usage errors share the exception status.
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "ucp: " << e.what() << "\n";
    return 2;
  }
  return status;
}
