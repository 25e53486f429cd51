// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "msbg/grid.hpp"
#include "msbg/temporal.hpp"

namespace msbg {

// Layout, all multi-byte values little-endian:
//   "MSBG" | u32 version | u32 levels | levels x (u32 H, u32 W, u32 D)
//   | pyramid payload
//   [ | u32 id_len | camera_id bytes | u32 entries
//     | entries x (f64 timestamp | pyramid payload) ]
// A pyramid payload is every level's cells in index order, 12 float32 each.
// Timeline files carry their earliest entry as the leading payload, so they
// also load as a plain grid.
inline constexpr std::uint32_t kGridFileVersion = 1;

class GridFileError : public std::runtime_error {
 public:
  GridFileError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct GridFileContents {
  MultiScaleGrid grid;
  std::optional<GridTimeline> timeline;
};

std::vector<unsigned char> encode_grid(const MultiScaleGrid& msg);
std::vector<unsigned char> encode_timeline(const GridTimeline& timeline);

// Guidance factors are not stored; decoded pyramids get (1,1) for a single
// level and (2,2) per level otherwise.
GridFileContents decode_grid_file(std::span<const unsigned char> bytes);

std::vector<GuidanceFactors> default_factors_for(std::size_t levels);

MultiScaleGrid read_grid(const std::filesystem::path& path);
GridTimeline read_timeline(const std::filesystem::path& path);
void write_grid(const MultiScaleGrid& msg, const std::filesystem::path& path);
void write_timeline(const GridTimeline& tl, const std::filesystem::path& path);

std::vector<unsigned char> read_bytes(const std::filesystem::path& path);
void write_bytes(std::span<const unsigned char> bytes, const std::filesystem::path& path);

}  // namespace msbg
