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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ucp/tensor.hpp"

namespace ucp {

// On-disk tensor encoding, all integers little-endian:
//
//   offset  size      field
//   0       4         magic "UCPT"
//   4       2         format version (1)
//   6       1         dtype code (0 = f32, 1 = f16, 2 = bf16)
//   7       1         ndim
//   8       8 * ndim  extents
//   ...               payload, element_size * numel bytes, nothing after it
inline constexpr char kTensorMagic[4] = {'U', 'C', 'P', 'T'};
inline constexpr std::uint16_t kTensorFormatVersion = 1;

std::vector<std::byte> encode_tensor(const Tensor& t);

// Throws kCorruptHeader, kTruncatedPayload or kTrailingBytes.
Tensor decode_tensor(std::span<const std::byte> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);

// Adds kIo to the decode errors.
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace ucp
