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
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ucp/parallel_config.hpp"
#include "ucp/shard.hpp"

namespace ucp {

using ojson = nlohmann::ordered_json;

// Every JSON document this library writes carries this as "format_version".
inline constexpr int kFormatVersion = 1;

inline constexpr std::string_view kModelFile = "model.json";
inline constexpr std::string_view kConfigFile = "config.json";
inline constexpr std::string_view kManifestFile = "shards.json";

std::string rank_dir_name(std::uint32_t rank);

// config.json of a distributed checkpoint.
struct CheckpointMeta {
  ParallelConfig config;
  std::uint64_t step = 0;
  std::map<std::string, double> metadata;

  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

// rank_<g>/shards.json.
struct RankManifest {
  std::uint32_t rank = 0;
  Placement placement;
  std::vector<ShardEntry> shards;
};

ojson to_json(const ParallelConfig& cfg);
ParallelConfig parallel_config_from_json(const ojson& j);
ojson to_json(const ShardEntry& e);
ShardEntry shard_entry_from_json(const ojson& j);

std::string checkpoint_meta_json(const CheckpointMeta& meta);
CheckpointMeta parse_checkpoint_meta(std::string_view text);
CheckpointMeta read_checkpoint_meta(const std::filesystem::path& ckpt_dir);

std::string rank_manifest_json(const RankManifest& m);
RankManifest parse_rank_manifest(std::string_view text);
RankManifest read_rank_manifest(const std::filesystem::path& rank_dir);

// Throws kManifest when a field is missing or ill-typed.
ojson parse_json_document(std::string_view text, std::string_view what);

}  // namespace ucp
