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

#include "ucp/tensor.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "ucp/hash.hpp"

namespace ucp {

std::string_view dtype_name(DType dtype) {
  switch (dtype) {
    case DType::kF32: return "f32";
    case DType::kF16: return "f16";
    case DType::kBF16: return "bf16";
  }
  return "?";
}

DType parse_dtype(std::string_view name) {
  if (name == "f32") return DType::kF32;
  if (name == "f16") return DType::kF16;
  if (name == "bf16") return DType::kBF16;
  throw Error(ErrorCode::kInvalidArgument, "unknown dtype '" + std::string(name) + "'");
}

std::uint64_t numel(const Shape& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(DType dtype, Shape shape)
    : dtype_(dtype), shape_(std::move(shape)), numel_(ucp::numel(shape_)) {
  bytes_.assign(numel_ * element_size(dtype_), std::byte{0});
}

Tensor::Tensor(DType dtype, Shape shape, std::vector<std::byte> bytes)
    : dtype_(dtype), shape_(std::move(shape)), numel_(ucp::numel(shape_)),
      bytes_(std::move(bytes)) {
  if (bytes_.size() != numel_ * element_size(dtype_)) {
    throw Error(ErrorCode::kShapeMismatch,
                "payload of " + std::to_string(bytes_.size()) + " bytes does not match " +
                    std::string(dtype_name(dtype_)) + shape_string(shape_));
  }
}

Tensor Tensor::from_f32(Shape shape, std::span<const float> values) {
  Tensor t(DType::kF32, std::move(shape));
  if (values.size() != t.numel()) {
    throw Error(ErrorCode::kShapeMismatch, "value count does not match shape " +
                                               shape_string(t.shape()));
  }
  std::memcpy(t.bytes_.data(), values.data(), values.size_bytes());
  return t;
}

std::span<const float> Tensor::f32() const {
  if (dtype_ != DType::kF32) throw Error(ErrorCode::kInvalidArgument, "tensor is not f32");
  return {reinterpret_cast<const float*>(bytes_.data()), numel_};
}

std::span<float> Tensor::mutable_f32() {
  if (dtype_ != DType::kF32) throw Error(ErrorCode::kInvalidArgument, "tensor is not f32");
  return {reinterpret_cast<float*>(bytes_.data()), numel_};
}

std::span<const std::uint16_t> Tensor::bits16() const {
  if (dtype_ == DType::kF32) throw Error(ErrorCode::kInvalidArgument, "tensor is f32");
  return {reinterpret_cast<const std::uint16_t*>(bytes_.data()), numel_};
}

std::span<std::uint16_t> Tensor::mutable_bits16() {
  if (dtype_ == DType::kF32) throw Error(ErrorCode::kInvalidArgument, "tensor is f32");
  return {reinterpret_cast<std::uint16_t*>(bytes_.data()), numel_};
}

Tensor Tensor::reshaped(Shape shape) const {
  if (ucp::numel(shape) != numel_) {
    throw Error(ErrorCode::kShapeMismatch,
                "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Tensor(dtype_, std::move(shape), bytes_);
}

Tensor gen_tensor(std::uint64_t seed, std::string_view name, std::string_view tag,
                  const Shape& shape) {
  for (auto d : shape) {
    if (d >= (1ULL << 32)) throw Error(ErrorCode::kInvalidArgument, "extent exceeds 2^32");
  }
  Tensor t(DType::kF32, shape);
  const std::uint64_t key = stream_key(seed, name, tag);
  auto out = t.mutable_f32();
  for (std::uint64_t i = 0; i < out.size(); ++i) out[i] = unit_value(element_hash(key, i));
  return t;
}

std::uint16_t f32_to_bf16_bits(float value) noexcept {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  if ((bits & 0x7FFFFFFFu) > 0x7F800000u) {
    return static_cast<std::uint16_t>((bits >> 16) | 0x0040u);
  }
  const std::uint32_t lsb = (bits >> 16) & 1u;
  bits += 0x7FFFu + lsb;
  return static_cast<std::uint16_t>(bits >> 16);
}

float bf16_bits_to_f32(std::uint16_t bits) noexcept {
  return std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16);
}

std::uint16_t f32_to_f16_bits(float value) noexcept {
  std::uint32_t f = std::bit_cast<std::uint32_t>(value);
  const std::uint32_t sign = (f >> 16) & 0x8000u;
  f &= 0x7FFFFFFFu;
  std::uint32_t out;
  if (f >= (143u << 23)) {
    // |value| >= 65536, inf or nan.
    out = f > 0x7F800000u ? 0x7E00u : 0x7C00u;
  } else if (f < (113u << 23)) {
    // Below the smallest f16 normal: round the scaled mantissa by hand.
    const std::uint32_t e = f >> 23;
    if (e == 0) {
      out = 0;
    } else {
      const std::uint32_t m = (f & 0x7FFFFFu) | 0x800000u;
      const std::uint32_t shift = 126u - e;
      if (shift >= 25) {
        out = 0;
      } else {
        std::uint32_t q = m >> shift;
        const std::uint32_t rem = m & ((1u << shift) - 1u);
        const std::uint32_t half = 1u << (shift - 1u);
        if (rem > half || (rem == half && (q & 1u))) ++q;
        out = q;
      }
    }
  } else {
    const std::uint32_t mant_odd = (f >> 13) & 1u;
    f += (static_cast<std::uint32_t>(15 - 127) << 23) + 0xFFFu;
    f += mant_odd;
    out = f >> 13;
  }
  return static_cast<std::uint16_t>(out | sign);
}

float f16_bits_to_f32(std::uint16_t h) noexcept {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
  const std::uint32_t exp = (h >> 10) & 0x1Fu;
  std::uint32_t mant = h & 0x3FFu;
  std::uint32_t bits;
  if (exp == 0) {
    if (mant == 0) {
      bits = sign;
    } else {
      std::uint32_t shifts = 0;
      while (!(mant & 0x400u)) {
        mant <<= 1;
        ++shifts;
      }
      mant &= 0x3FFu;
      bits = sign | ((113u - shifts) << 23) | (mant << 13);
    }
  } else if (exp == 31) {
    bits = sign | 0x7F800000u | (mant << 13);
  } else {
    bits = sign | ((exp + 112u) << 23) | (mant << 13);
  }
  return std::bit_cast<float>(bits);
}

Tensor cast(const Tensor& t, DType to) {
  if (t.dtype() == to) return t;
  if (t.dtype() != DType::kF32 && to != DType::kF32) {
    throw Error(ErrorCode::kUnsupportedCast, std::string(dtype_name(t.dtype())) + " -> " +
                                                 std::string(dtype_name(to)) +
                                                 " must go through f32");
  }
  Tensor out(to, t.shape());
  if (t.dtype() == DType::kF32) {
    auto src = t.f32();
    auto dst = out.mutable_bits16();
    if (to == DType::kBF16) {
      std::transform(src.begin(), src.end(), dst.begin(), f32_to_bf16_bits);
    } else {
      std::transform(src.begin(), src.end(), dst.begin(), f32_to_f16_bits);
    }
  } else {
    auto src = t.bits16();
    auto dst = out.mutable_f32();
    if (t.dtype() == DType::kBF16) {
      std::transform(src.begin(), src.end(), dst.begin(), bf16_bits_to_f32);
    } else {
      std::transform(src.begin(), src.end(), dst.begin(), f16_bits_to_f32);
    }
  }
  return out;
}

Tensor slice_flat(const Tensor& t, std::uint64_t start, std::uint64_t end) {
  if (start > end || end > t.numel()) {
    throw Error(ErrorCode::kBounds, "flat slice [" + std::to_string(start) + "," +
                                        std::to_string(end) + ") of " +
                                        std::to_string(t.numel()) + " elements");
  }
  const std::size_t es = element_size(t.dtype());
  std::vector<std::byte> bytes(t.bytes().begin() + start * es, t.bytes().begin() + end * es);
  return Tensor(t.dtype(), Shape{end - start}, std::move(bytes));
}

namespace {

// Splits shape around `axis` into (outer count, inner element count).
std::pair<std::uint64_t, std::uint64_t> outer_inner(const Shape& shape, std::size_t axis) {
  std::uint64_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  return {outer, inner};
}

}  // namespace

Tensor slice_axis(const Tensor& t, std::size_t axis, std::uint64_t begin, std::uint64_t end) {
  if (axis >= t.rank() || begin > end || end > t.shape()[axis]) {
    throw Error(ErrorCode::kBounds, "slice [" + std::to_string(begin) + "," +
                                        std::to_string(end) + ") on axis " +
                                        std::to_string(axis) + " of " +
                                        shape_string(t.shape()));
  }
  Shape out_shape = t.shape();
  out_shape[axis] = end - begin;
  Tensor out(t.dtype(), out_shape);
  const auto [outer, inner] = outer_inner(t.shape(), axis);
  const std::size_t es = element_size(t.dtype());
  const std::uint64_t src_stride = t.shape()[axis] * inner * es;
  const std::uint64_t run = (end - begin) * inner * es;
  const std::byte* src = t.bytes().data() + begin * inner * es;
  std::byte* dst = out.mutable_bytes().data();
  for (std::uint64_t o = 0; o < outer; ++o) {
    if (run) std::memcpy(dst + o * run, src + o * src_stride, run);
  }
  return out;
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "concat of zero parts");
  const Tensor& first = parts.front();
  if (axis >= first.rank()) {
    throw Error(ErrorCode::kBounds, "concat axis " + std::to_string(axis) + " on rank " +
                                        std::to_string(first.rank()));
  }
  Shape out_shape = first.shape();
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    bool ok = p.dtype() == first.dtype() && p.rank() == first.rank();
    for (std::size_t i = 0; ok && i < p.rank(); ++i) {
      if (i != axis && p.shape()[i] != first.shape()[i]) ok = false;
    }
    if (!ok) {
      throw Error(ErrorCode::kShapeMismatch, "concat of " + shape_string(first.shape()) +
                                                 " with " + shape_string(p.shape()));
    }
    out_shape[axis] += p.shape()[axis];
  }
  Tensor out(first.dtype(), out_shape);
  const auto [outer, inner] = outer_inner(out_shape, axis);
  const std::size_t es = element_size(first.dtype());
  std::byte* dst = out.mutable_bytes().data();
  for (std::uint64_t o = 0; o < outer; ++o) {
    for (const auto& p : parts) {
      const std::uint64_t run = p.shape()[axis] * inner * es;
      if (run) std::memcpy(dst, p.bytes().data() + o * run, run);
      dst += run;
    }
  }
  return out;
}

Tensor flatten(const Tensor& t) { return t.reshaped(Shape{t.numel()}); }

}  // namespace ucp
