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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ucp/error.hpp"

namespace ucp {

enum class DType : std::uint8_t { kF32 = 0, kF16 = 1, kBF16 = 2 };

constexpr std::size_t element_size(DType dtype) noexcept {
  return dtype == DType::kF32 ? 4 : 2;
}

std::string_view dtype_name(DType dtype);
DType parse_dtype(std::string_view name);

using Shape = std::vector<std::uint64_t>;

// Marks a fragment element that is padding rather than part of a parameter.
inline constexpr std::uint64_t kPadIndex = ~std::uint64_t{0};

// Product of extents; 1 for rank-0.
std::uint64_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense, contiguous, row-major tensor. Copies are deep; a Tensor that is not
// mutated after construction can be read from any number of threads.
class Tensor {
 public:
  Tensor() : Tensor(DType::kF32, Shape{0}) {}
  Tensor(DType dtype, Shape shape);
  Tensor(DType dtype, Shape shape, std::vector<std::byte> bytes);

  static Tensor from_f32(Shape shape, std::span<const float> values);

  DType dtype() const noexcept { return dtype_; }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::uint64_t numel() const noexcept { return numel_; }
  std::size_t byte_size() const noexcept { return bytes_.size(); }

  std::span<const std::byte> bytes() const noexcept { return bytes_; }
  std::span<std::byte> mutable_bytes() noexcept { return bytes_; }

  // Typed views. f32() requires kF32; bits16() requires kF16 or kBF16.
  std::span<const float> f32() const;
  std::span<float> mutable_f32();
  std::span<const std::uint16_t> bits16() const;
  std::span<std::uint16_t> mutable_bits16();

  // Same bytes, new shape with equal element count.
  Tensor reshaped(Shape shape) const;

  // Bit-level equality of dtype, shape and payload.
  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dtype_ == b.dtype_ && a.shape_ == b.shape_ && a.bytes_ == b.bytes_;
  }

 private:
  DType dtype_;
  Shape shape_;
  std::uint64_t numel_ = 0;
  std::vector<std::byte> bytes_;
};

// Maps a 64-bit hash to a float in [-1, 1) using only integer operations and
// exact float arithmetic: the top 23 bits become the mantissa of a value in
// [1, 2), which is then shifted and doubled. Results are multiples of 2^-22.
inline float unit_value(std::uint64_t h) noexcept {
  const std::uint32_t bits = 0x3F800000u | static_cast<std::uint32_t>(h >> 41);
  return (std::bit_cast<float>(bits) - 1.5f) * 2.0f;
}

// Element i is unit_value(element_hash(stream_key(seed, name, tag), i)).
Tensor gen_tensor(std::uint64_t seed, std::string_view name, std::string_view tag,
                  const Shape& shape);

// Round-to-nearest-even scalar conversions.
std::uint16_t f32_to_bf16_bits(float value) noexcept;
std::uint16_t f32_to_f16_bits(float value) noexcept;
float bf16_bits_to_f32(std::uint16_t bits) noexcept;
float f16_bits_to_f32(std::uint16_t bits) noexcept;

// Either the source or the target must be kF32; kF16 <-> kBF16 is rejected.
Tensor cast(const Tensor& t, DType to);

// Rank-1 copy of flat elements [start, end) of the row-major view.
Tensor slice_flat(const Tensor& t, std::uint64_t start, std::uint64_t end);

// Copy of indices [begin, end) along `axis`.
Tensor slice_axis(const Tensor& t, std::size_t axis, std::uint64_t begin,
                  std::uint64_t end);

// Parts must agree on dtype, rank and every extent except `axis`.
Tensor concat(std::span<const Tensor> parts, std::size_t axis);

Tensor flatten(const Tensor& t);

}  // namespace ucp
