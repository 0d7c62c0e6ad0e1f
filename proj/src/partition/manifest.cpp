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

#include "ucp/manifest.hpp"

#include "ucp/fs_util.hpp"

namespace ucp {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kManifest, what); }

ojson placement_json(const Placement& p) {
  return {{"pp_rank", p.pp_rank}, {"tp_rank", p.tp_rank}, {"dp_rank", p.dp_rank}};
}

Placement placement_from(const ojson& j) {
  return {j.at("pp_rank").get<std::uint32_t>(), j.at("tp_rank").get<std::uint32_t>(),
          j.at("dp_rank").get<std::uint32_t>()};
}

ojson pattern_json(const StackedPattern& p) {
  ojson j;
  j["summary"] = pattern_name(p.summary());
  j["pipeline"] = pattern_name(p.pipeline.kind);
  j["stages"] = p.stages;
  j["tensor"] = pattern_name(p.tensor.kind);
  if (p.tensor.kind == PatternKind::kShardNC) {
    j["segments"] = ojson::array();
    for (const auto& s : p.tensor.segments) j["segments"].push_back({s.offset, s.length});
  }
  if (p.tensor.kind == PatternKind::kShardHy) j["grid"] = {p.tensor.grid_rows, p.tensor.grid_cols};
  j["data"] = pattern_name(p.data.kind);
  return j;
}

StackedPattern pattern_from(const ojson& j) {
  StackedPattern p;
  p.pipeline.kind = parse_pattern(j.at("pipeline").get<std::string>());
  p.stages = j.at("stages").get<std::vector<std::uint32_t>>();
  p.tensor.kind = parse_pattern(j.at("tensor").get<std::string>());
  if (j.contains("segments")) {
    for (const auto& s : j.at("segments")) {
      p.tensor.segments.push_back({s.at(0).get<std::uint64_t>(), s.at(1).get<std::uint64_t>()});
    }
  }
  if (j.contains("grid")) {
    p.tensor.grid_rows = j.at("grid").at(0).get<std::uint32_t>();
    p.tensor.grid_cols = j.at("grid").at(1).get<std::uint32_t>();
  }
  p.data.kind = parse_pattern(j.at("data").get<std::string>());
  if (p.stages.empty()) bad("pattern without stages");
  return p;
}

void check_version(const ojson& j, std::string_view what) {
  if (!j.contains("format_version") || j.at("format_version").get<int>() != kFormatVersion) {
    bad(std::string(what) + ": unsupported format_version");
  }
}

}  // namespace

std::string rank_dir_name(std::uint32_t rank) { return "rank_" + std::to_string(rank); }

ojson parse_json_document(std::string_view text, std::string_view what) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    bad(std::string(what) + ": " + e.what());
  }
}

ojson to_json(const ParallelConfig& c) {
  ojson j;
  j["dp"] = c.dp;
  j["tp"] = c.tp;
  j["pp"] = c.pp;
  j["sp"] = c.sp;
  j["zero_stage"] = static_cast<int>(c.zero);
  j["pp_schedule"] = c.schedule.kind == PipelineSchedule::Kind::kInterleaved ? "Interleaved"
                                                                              : "Sequential1F1B";
  j["interleave_chunks"] = c.schedule.chunks;
  j["tp_rows"] = c.tp_rows;
  return j;
}

ParallelConfig parallel_config_from_json(const ojson& j) {
  ParallelConfig c;
  c.dp = j.at("dp").get<std::uint32_t>();
  c.tp = j.at("tp").get<std::uint32_t>();
  c.pp = j.at("pp").get<std::uint32_t>();
  c.sp = j.at("sp").get<std::uint32_t>();
  const int z = j.at("zero_stage").get<int>();
  if (z != 0 && z != 1 && z != 3) bad("zero_stage must be 0, 1 or 3");
  c.zero = static_cast<ZeroStage>(z);
  const auto sched = j.at("pp_schedule").get<std::string>();
  if (sched == "Interleaved") {
    c.schedule = PipelineSchedule::interleaved(j.at("interleave_chunks").get<std::uint32_t>());
  } else if (sched == "Sequential1F1B") {
    c.schedule = PipelineSchedule::sequential();
  } else {
    bad("unknown pp_schedule " + sched);
  }
  c.tp_rows = j.value("tp_rows", 1u);
  return c;
}

ojson to_json(const ShardEntry& e) {
  ojson j;
  j["param"] = e.param;
  j["state"] = state_kind_name(e.state);
  j["file"] = e.file;
  j["dtype"] = dtype_name(e.dtype);
  j["shape"] = e.shape;
  j["placement"] = placement_json(e.placement);
  j["pattern"] = pattern_json(e.pattern);
  j["tp_degree"] = e.tp_degree;
  j["dp_degree"] = e.dp_degree;
  j["param_shape"] = e.param_shape;
  j["tp_shape"] = e.tp_shape;
  if (e.flat_range) {
    j["flat_range"] = {e.flat_range->start, e.flat_range->end};
    j["padded_numel"] = e.padded_numel;
  } else {
    j["flat_range"] = nullptr;
  }
  j["pad_elems"] = e.pad_elems;
  return j;
}

ShardEntry shard_entry_from_json(const ojson& j) {
  try {
    ShardEntry e;
    e.param = j.at("param").get<std::string>();
    e.state = parse_state_kind(j.at("state").get<std::string>());
    e.file = j.at("file").get<std::string>();
    e.dtype = parse_dtype(j.at("dtype").get<std::string>());
    e.shape = j.at("shape").get<Shape>();
    e.placement = placement_from(j.at("placement"));
    e.pattern = pattern_from(j.at("pattern"));
    e.tp_degree = j.at("tp_degree").get<std::uint32_t>();
    e.dp_degree = j.at("dp_degree").get<std::uint32_t>();
    e.param_shape = j.at("param_shape").get<Shape>();
    e.tp_shape = j.at("tp_shape").get<Shape>();
    if (!j.at("flat_range").is_null()) {
      e.flat_range = FlatRange{j.at("flat_range").at(0).get<std::uint64_t>(),
                               j.at("flat_range").at(1).get<std::uint64_t>()};
      e.padded_numel = j.at("padded_numel").get<std::uint64_t>();
    }
    e.pad_elems = j.at("pad_elems").get<std::uint64_t>();
    if (e.file.find('/') != std::string::npos || e.file.find("..") != std::string::npos) {
      bad("shard file name escapes the rank directory: " + e.file);
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    bad(std::string("shard entry: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kManifest) throw;
    bad("shard entry: " + ex.message());
  }
}

std::string checkpoint_meta_json(const CheckpointMeta& meta) {
  ojson j;
  j["format_version"] = kFormatVersion;
  j["parallel"] = to_json(meta.config);
  j["world_size"] = meta.config.world_size();
  j["rank_layout"] = "rank = (pp_rank * tp + tp_rank) * dp + dp_rank";
  j["step"] = meta.step;
  j["metadata"] = meta.metadata;
  return j.dump(2) + "\n";
}

CheckpointMeta parse_checkpoint_meta(std::string_view text) {
  const auto j = parse_json_document(text, kConfigFile);
  try {
    check_version(j, kConfigFile);
    CheckpointMeta meta;
    meta.config = parallel_config_from_json(j.at("parallel"));
    meta.step = j.at("step").get<std::uint64_t>();
    meta.metadata = j.at("metadata").get<std::map<std::string, double>>();
    if (j.at("world_size").get<std::uint32_t>() != meta.config.world_size()) {
      bad("config.json: world_size disagrees with dp * tp * pp");
    }
    return meta;
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("config.json: ") + e.what());
  }
}

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& ckpt_dir) {
  return parse_checkpoint_meta(read_text(ckpt_dir / kConfigFile));
}

std::string rank_manifest_json(const RankManifest& m) {
  ojson j;
  j["format_version"] = kFormatVersion;
  j["rank"] = m.rank;
  j["placement"] = placement_json(m.placement);
  j["shards"] = ojson::array();
  for (const auto& e : m.shards) j["shards"].push_back(to_json(e));
  return j.dump(2) + "\n";
}

RankManifest parse_rank_manifest(std::string_view text) {
  const auto j = parse_json_document(text, kManifestFile);
  try {
    check_version(j, kManifestFile);
    RankManifest m;
    m.rank = j.at("rank").get<std::uint32_t>();
    m.placement = placement_from(j.at("placement"));
    for (const auto& e : j.at("shards")) {
      auto entry = shard_entry_from_json(e);
      entry.rank = m.rank;
      m.shards.push_back(std::move(entry));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("shards.json: ") + e.what());
  }
}

RankManifest read_rank_manifest(const std::filesystem::path& rank_dir) {
  const auto path = rank_dir / kManifestFile;
  if (!std::filesystem::exists(path)) bad(path.string() + " is missing");
  try {
    return parse_rank_manifest(read_text(path));
  } catch (const Error& e) {
    throw Error(e.code(), rank_dir.string() + ": " + e.message());
  }
}

}  // namespace ucp
