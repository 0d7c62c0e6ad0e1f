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

#include "ucp/tensor_file.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "ucp/fs_util.hpp"

namespace ucp {

static_assert(std::endian::native == std::endian::little,
              "tensor payloads are copied verbatim and assume a little-endian host");

namespace {

constexpr std::size_t kFixedHeader = 8;

template <typename T>
void put(std::vector<std::byte>& out, T value) {
  const auto* p = reinterpret_cast<const std::byte*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::byte* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

}  // namespace

std::vector<std::byte> encode_tensor(const Tensor& t) {
  if (t.rank() > 255) throw Error(ErrorCode::kInvalidArgument, "rank exceeds 255");
  std::vector<std::byte> out;
  out.reserve(kFixedHeader + 8 * t.rank() + t.byte_size());
  for (char c : kTensorMagic) out.push_back(static_cast<std::byte>(c));
  put<std::uint16_t>(out, kTensorFormatVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(t.dtype()));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.shape()) put<std::uint64_t>(out, d);
  out.insert(out.end(), t.bytes().begin(), t.bytes().end());
  return out;
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < kFixedHeader) {
    throw Error(ErrorCode::kCorruptHeader, "file shorter than the fixed header");
  }
  if (std::memcmp(bytes.data(), kTensorMagic, 4) != 0) {
    throw Error(ErrorCode::kCorruptHeader, "bad magic");
  }
  const auto version = get<std::uint16_t>(bytes.data() + 4);
  if (version != kTensorFormatVersion) {
    throw Error(ErrorCode::kCorruptHeader, "unsupported version " + std::to_string(version));
  }
  const auto code = get<std::uint8_t>(bytes.data() + 6);
  if (code > 2) throw Error(ErrorCode::kCorruptHeader, "bad dtype code " + std::to_string(code));
  const auto dtype = static_cast<DType>(code);
  const auto ndim = get<std::uint8_t>(bytes.data() + 7);
  const std::size_t header = kFixedHeader + 8u * ndim;
  if (bytes.size() < header) throw Error(ErrorCode::kCorruptHeader, "truncated extents");
  Shape shape(ndim);
  for (std::size_t i = 0; i < ndim; ++i) {
    shape[i] = get<std::uint64_t>(bytes.data() + kFixedHeader + 8 * i);
  }
  // Reject extents whose product overflows before trusting the payload size.
  unsigned __int128 expected = element_size(dtype);
  for (auto d : shape) {
    // Saturate rather than stop: a later zero extent still empties it.
    expected = std::min<unsigned __int128>(expected, bytes.size() + 1) * d;
  }
  const std::size_t payload = bytes.size() - header;
  if (expected > payload) {
    throw Error(ErrorCode::kTruncatedPayload,
                "payload has " + std::to_string(payload) + " bytes, header wants more");
  }
  if (expected < payload) {
    throw Error(ErrorCode::kTrailingBytes,
                std::to_string(payload - static_cast<std::size_t>(expected)) +
                    " bytes after payload");
  }
  return Tensor(dtype, std::move(shape),
                std::vector<std::byte>(bytes.begin() + header, bytes.end()));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_file_atomic(path, encode_tensor(t));
}

Tensor read_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

}  // namespace ucp
