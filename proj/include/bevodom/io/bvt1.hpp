#pragma once

// BVT1 tensor interchange:
//   "BVT1" | u32 rank | rank x u32 dims | prod(dims) x f32 values (row-major)
// All multi-byte fields little-endian. Total size 8 + 4 * rank + 4 * numel.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "bevodom/errors.hpp"
#include "bevodom/tensor.hpp"

namespace bevodom::io {

inline constexpr char kBvt1Magic[4] = {'B', 'V', 'T', '1'};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(in[at + std::size_t(i)]) << (8 * i);
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> write_bvt1(const TensorF& t) {
  if (t.rank() == 0) throw FormatError("BVT1 cannot encode a rank-0 tensor");
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * t.rank() + 4 * t.size());
  out.insert(out.end(), kBvt1Magic, kBvt1Magic + 4);
  detail::put_u32(out, std::uint32_t(t.rank()));
  for (std::size_t d : t.shape()) {
    if (d > 0xffffffffu) throw FormatError("BVT1 dimension exceeds u32");
    detail::put_u32(out, std::uint32_t(d));
  }
  for (float f : t.values()) detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

inline TensorF read_bvt1(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw FormatError("BVT1: truncated header");
  if (std::memcmp(bytes.data(), kBvt1Magic, 4) != 0) throw FormatError("BVT1: bad magic");
  const std::uint32_t rank = detail::get_u32(bytes, 4);
  if (rank == 0) throw FormatError("BVT1: rank 0 is not allowed");
  if (bytes.size() < 8 + 4 * std::size_t(rank)) {
    throw FormatError("BVT1: length mismatch (truncated dims)");
  }
  Shape shape(rank);
  unsigned __int128 numel = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    shape[i] = detail::get_u32(bytes, 8 + 4 * std::size_t(i));
    numel *= shape[i];
  }
  const unsigned __int128 expected = 8 + 4 * (unsigned __int128)rank + 4 * numel;
  if (expected != bytes.size()) {
    throw FormatError("BVT1: length mismatch (header implies " +
                      std::to_string((unsigned long long)expected) + " bytes, got " +
                      std::to_string(bytes.size()) + ")");
  }
  std::vector<float> values(static_cast<std::size_t>(numel));
  const std::size_t base = 8 + 4 * std::size_t(rank);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(detail::get_u32(bytes, base + 4 * i));
  }
  return TensorF(std::move(shape), std::move(values));
}

}  // namespace bevodom::io
