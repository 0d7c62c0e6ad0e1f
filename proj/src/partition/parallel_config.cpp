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

#include "ucp/parallel_config.hpp"

#include <charconv>
#include <vector>

#include "ucp/error.hpp"

namespace ucp {

namespace {

[[noreturn]] void incompatible(const std::string& what) {
  throw Error(ErrorCode::kIncompatibleConfig, what);
}

std::uint32_t parse_u32(std::string_view s, std::string_view what) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string_view zero_stage_name(ZeroStage zero) {
  switch (zero) {
    case ZeroStage::kZ0: return "z0";
    case ZeroStage::kZ1: return "z1";
    case ZeroStage::kZ3: return "z3";
  }
  return "?";
}

void ParallelConfig::validate(std::uint32_t layer_slots) const {
  if (dp == 0 || tp == 0 || pp == 0 || sp == 0 || tp_rows == 0) incompatible("degrees must be >= 1");
  if (zero == ZeroStage::kZ3 && (tp != 1 || pp != 1)) incompatible("ZeRO-3 requires tp = pp = 1");
  if (tp % tp_rows != 0) incompatible("tp_rows must divide tp");
  if (schedule.kind == PipelineSchedule::Kind::kInterleaved) {
    if (pp < 2) incompatible("interleaved schedule needs pp >= 2");
    if (schedule.chunks == 0 || layer_slots % (pp * schedule.chunks) != 0) {
      incompatible(std::to_string(layer_slots) + " layers do not split into " +
                   std::to_string(pp) + " x " + std::to_string(schedule.chunks) + " chunks");
    }
  } else if (pp > layer_slots) {
    incompatible("pp " + std::to_string(pp) + " exceeds " + std::to_string(layer_slots) +
                 " layers");
  }
}

std::string ParallelConfig::to_string() const {
  std::string s = std::to_string(dp) + "," + std::to_string(tp) + "," + std::to_string(pp) + "," +
                  std::to_string(sp) + "," + std::string(zero_stage_name(zero)) + ",";
  s += schedule.kind == PipelineSchedule::Kind::kInterleaved
           ? "int" + std::to_string(schedule.chunks)
           : std::string("seq");
  if (tp_rows != 1) s += ",rows" + std::to_string(tp_rows);
  return s;
}

ParallelConfig ParallelConfig::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto comma = text.find(',');
    parts.push_back(text.substr(0, comma));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (parts.size() != 6 && parts.size() != 7) {
    throw Error(ErrorCode::kInvalidArgument,
                "config must be dp,tp,pp,sp,zero,schedule[,rowsN]");
  }
  ParallelConfig c;
  c.dp = parse_u32(parts[0], "dp");
  c.tp = parse_u32(parts[1], "tp");
  c.pp = parse_u32(parts[2], "pp");
  c.sp = parse_u32(parts[3], "sp");
  const auto z = parts[4];
  if (z == "z0" || z == "0") c.zero = ZeroStage::kZ0;
  else if (z == "z1" || z == "1") c.zero = ZeroStage::kZ1;
  else if (z == "z3" || z == "3") c.zero = ZeroStage::kZ3;
  else throw Error(ErrorCode::kInvalidArgument, "zero stage must be z0, z1 or z3");
  const auto sched = parts[5];
  if (sched == "seq" || sched == "1f1b") {
    c.schedule = PipelineSchedule::sequential();
  } else if (sched.starts_with("int")) {
    c.schedule = PipelineSchedule::interleaved(parse_u32(sched.substr(3), "interleave"));
  } else {
    throw Error(ErrorCode::kInvalidArgument, "schedule must be seq or int<v>");
  }
  if (parts.size() == 7) {
    if (!parts[6].starts_with("rows")) throw Error(ErrorCode::kInvalidArgument, "expected rowsN");
    c.tp_rows = parse_u32(parts[6].substr(4), "tp_rows");
  }
  return c;
}

}  // namespace ucp
