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
#include <string_view>

namespace ucp {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Seeds the per-element stream for (seed, name, tag). Element i of the stream
// is element_hash(stream_key(...), i).
constexpr std::uint64_t stream_key(std::uint64_t seed, std::string_view name,
                                   std::string_view tag) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ fnv1a64(name));
  h = mix64(h ^ fnv1a64(tag));
  return h;
}

constexpr std::uint64_t element_hash(std::uint64_t key, std::uint64_t index) noexcept {
  return mix64(key ^ mix64(index));
}

}  // namespace ucp
