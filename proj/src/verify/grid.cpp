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
#include <cstdio>
#include <cstring>

#include "ucp/fs_util.hpp"
#include "ucp/pattern.hpp"
#include "ucp/verify.hpp"

namespace ucp {

namespace fs = std::filesystem;

std::vector<ParallelConfig> default_grid_configs() {
  std::vector<ParallelConfig> out;
  for (std::uint32_t dp : {1u, 2u, 4u}) {
    for (std::uint32_t tp : {1u, 2u}) {
      for (std::uint32_t pp : {1u, 2u}) {
        for (ZeroStage z : {ZeroStage::kZ0, ZeroStage::kZ1, ZeroStage::kZ3}) {
          if (z == ZeroStage::kZ3 && (tp != 1 || pp != 1)) continue;
          ParallelConfig c;
          c.dp = dp;
          c.tp = tp;
          c.pp = pp;
          c.zero = z;
          out.push_back(c);
          if (pp == 2) {
            c.schedule = PipelineSchedule::interleaved(2);
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

std::vector<GridModel> default_grid_models() {
  ModelScale s;  // 4 layers, hidden 64, 4 experts, 8 q / 2 kv heads
  return {{ModelFamily::kDenseGPT, s}, {ModelFamily::kMoE, s}, {ModelFamily::kGQA, s}};
}

std::vector<ConfigPair> default_resume_pairs() {
  auto p = [](const char* text) { return ParallelConfig::parse(text); };
  return {
      {p("2,1,4,1,z1,seq"), p("2,2,2,1,z0,seq")},
      {p("1,1,1,1,z0,seq"), p("4,1,1,1,z3,seq")},
      {p("4,1,1,1,z3,seq"), p("1,2,2,1,z1,seq")},
      {p("2,2,1,1,z1,seq"), p("1,1,2,1,z0,int2")},
      {p("2,1,2,1,z1,int2"), p("1,2,1,1,z0,seq,rows2")},
      {p("2,2,2,1,z0,seq"), p("4,1,1,1,z1,seq")},
  };
}

GridSpec default_grid() {
  GridSpec g;
  g.models = default_grid_models();
  g.configs = default_grid_configs();
  g.resume_pairs = default_resume_pairs();
  g.trainer.steps = 100;
  return g;
}

std::vector<ParallelConfig> compatible_configs(const ModelSpec& spec,
                                               const std::vector<ParallelConfig>& configs) {
  std::vector<ParallelConfig> out;
  for (const auto& c : configs) {
    try {
      for (const auto& p : spec.params) assign_pattern(spec, p, c);
      out.push_back(c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kIncompatibleConfig && e.code() != ErrorCode::kPatternCoverage) {
        throw;
      }
    }
  }
  return out;
}

namespace {

std::string hex32(std::uint32_t bits) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "0x%08x", bits);
  return buf;
}

std::string coords(const Shape& shape, std::uint64_t flat) {
  std::vector<std::uint64_t> idx(shape.size());
  for (std::size_t a = shape.size(); a-- > 0;) {
    idx[a] = flat % shape[a];
    flat /= shape[a];
  }
  std::string s = "[";
  for (std::size_t a = 0; a < idx.size(); ++a) s += (a ? "," : "") + std::to_string(idx[a]);
  return s + "]";
}

}  // namespace

std::optional<std::string> first_difference(const ModelState& expected, const ModelState& actual) {
  if (expected.step != actual.step) {
    return "step: expected " + std::to_string(expected.step) + " got " + std::to_string(actual.step);
  }
  if (expected.metadata != actual.metadata) return std::string("metadata differs");
  for (const auto& [name, ps] : expected.params) {
    const auto it = actual.params.find(name);
    if (it == actual.params.end()) return name + ": missing";
    for (auto k : kStateKinds) {
      const Tensor& a = ps.get(k);
      const Tensor& b = it->second.get(k);
      const std::string where = name + "/" + std::string(state_kind_name(k));
      if (a.dtype() != b.dtype() || a.shape() != b.shape()) {
        return where + ": expected " + shape_string(a.shape()) + " got " + shape_string(b.shape());
      }
      if (a == b) continue;
      const std::size_t es = element_size(a.dtype());
      for (std::uint64_t i = 0; i < a.numel(); ++i) {
        std::uint32_t x = 0, y = 0;
        std::memcpy(&x, a.bytes().data() + i * es, es);
        std::memcpy(&y, b.bytes().data() + i * es, es);
        if (x != y) return where + coords(a.shape(), i) + ": expected " + hex32(x) + " got " + hex32(y);
      }
    }
  }
  if (actual.params.size() != expected.params.size()) return std::string("extra params");
  return std::nullopt;
}

bool same_tree(const fs::path& a, const fs::path& b) {
  auto listing = [](const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
    }
    std::sort(files.begin(), files.end());
    return files;
  };
  const auto fa = listing(a);
  if (fa != listing(b)) return false;
  for (const auto& f : fa) {
    if (read_file(a / f) != read_file(b / f)) return false;
  }
  return true;
}

fs::path inject_fault(const fs::path& rank_dir, const std::string& file, std::uint64_t byte) {
  const fs::path path = rank_dir / file;
  auto bytes = read_file(path);
  if (bytes.size() < 8) throw Error(ErrorCode::kCorruptHeader, path.string());
  const std::uint64_t ndim = static_cast<std::uint8_t>(bytes[7]);
  const std::uint64_t at = 8 + 8 * ndim + byte;
  if (at >= bytes.size()) throw Error(ErrorCode::kBounds, "fault offset past the payload");
  bytes[at] = ~bytes[at];
  write_file_atomic(path, bytes);
  return path;
}

}  // namespace ucp
