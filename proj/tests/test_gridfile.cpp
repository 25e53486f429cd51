// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <limits>

#include "msbg/gridfile.hpp"
#include "oracles.hpp"

namespace msbg {
namespace {

MultiScaleGrid random_pyramid(Rng& rng) {
  MultiScaleGrid msg = MultiScaleGrid::default_pyramid();
  for (auto& g : msg.levels) g = oracle::random_grid(g.h(), g.w(), g.d(), rng, 0.3);
  return msg;
}

std::size_t error_offset(const std::vector<unsigned char>& bytes) {
  try {
    decode_grid_file(bytes);
  } catch (const GridFileError& e) {
    return e.offset();
  }
  return std::numeric_limits<std::size_t>::max();
}

void put_u32(std::vector<unsigned char>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<unsigned char>(v >> (8 * i));
}

TEST_CASE("header layout") {
  const auto bytes = encode_grid(MultiScaleGrid::default_pyramid());
  CHECK(std::memcmp(bytes.data(), "MSBG", 4) == 0);
  CHECK(bytes[4] == kGridFileVersion);
  CHECK(bytes[8] == 3);
  CHECK(bytes[12] == 2);  // level 0 H
  CHECK(bytes[20] == 1);  // level 0 D
  const std::size_t header = 12 + 3 * 12;
  CHECK(bytes.size() == header + (4 + 32 + 256) * kCoeffs * 4);
  // First coefficient is 1.0f little-endian.
  CHECK(bytes[header + 3] == 0x3f);
  CHECK(bytes[header + 2] == 0x80);
}

TEST_CASE("grid round trip") {
  Rng rng(1);
  const MultiScaleGrid msg = random_pyramid(rng);
  const auto bytes = encode_grid(msg);
  const GridFileContents back = decode_grid_file(bytes);
  CHECK_FALSE(back.timeline.has_value());
  CHECK(encode_grid(back.grid) == bytes);
  CHECK(back.grid.shapes() == msg.shapes());
  CHECK(back.grid.factors == default_factors_for(3));
  for (std::size_t l = 0; l < 3; ++l) {
    for (std::size_t i = 0; i < msg.levels[l].values().size(); ++i) {
      CHECK(back.grid.levels[l].values()[i] ==
            static_cast<double>(static_cast<float>(msg.levels[l].values()[i])));
    }
  }
  CHECK(default_factors_for(1) == std::vector<GuidanceFactors>{{1, 1}});
}

TEST_CASE("timeline round trip") {
  Rng rng(2);
  GridTimeline tl("front_left");
  tl.insert(2.0, random_pyramid(rng));
  tl.insert(0.5, random_pyramid(rng));
  const auto bytes = encode_timeline(tl);
  const GridFileContents back = decode_grid_file(bytes);
  REQUIRE(back.timeline.has_value());
  CHECK(back.timeline->camera_id() == "front_left");
  REQUIRE(back.timeline->entries().size() == 2);
  CHECK(back.timeline->entries()[0].timestamp == 0.5);
  CHECK(encode_timeline(*back.timeline) == bytes);
  // The leading pyramid is the earliest entry.
  CHECK(back.grid.levels == back.timeline->entries()[0].grid.levels);
}

TEST_CASE("file helpers") {
  Rng rng(3);
  const auto dir = std::filesystem::temp_directory_path() / "msbg_gridfile_test";
  std::filesystem::create_directories(dir);
  const MultiScaleGrid msg = random_pyramid(rng);
  write_grid(msg, dir / "g.msbg");
  CHECK(encode_grid(read_grid(dir / "g.msbg")) == encode_grid(msg));
  CHECK_THROWS_AS(read_timeline(dir / "g.msbg"), GridFileError);
  GridTimeline tl("c");
  tl.insert(1.0, msg);
  write_timeline(tl, dir / "t.msbg");
  CHECK(read_timeline(dir / "t.msbg").entries().size() == 1);
  CHECK(encode_grid(read_grid(dir / "t.msbg")) == encode_grid(msg));
  CHECK_THROWS_AS(read_grid(dir / "missing.msbg"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed files are rejected with offsets") {
  Rng rng(4);
  const auto good = encode_grid(random_pyramid(rng));

  auto bad = good;
  bad[0] = 'X';
  CHECK(error_offset(bad) == 0);
  CHECK(error_offset({'M', 'S'}) == 0);

  bad = good;
  put_u32(bad, 4, 2);
  CHECK(error_offset(bad) == 4);

  bad = good;
  put_u32(bad, 8, 0);
  CHECK(error_offset(bad) == 8);

  bad = good;
  put_u32(bad, 12, 0);
  CHECK(error_offset(bad) == 12);

  bad = good;
  bad.resize(bad.size() - 1);
  CHECK_THROWS_WITH_AS(decode_grid_file(bad), doctest::Contains("truncated"), GridFileError);

  bad = good;
  const std::size_t payload = 12 + 36;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(&bad[payload + 4 * 5], &nan, 4);
  CHECK(error_offset(bad) == payload + 4 * 5);

  // Finer level smaller than the coarse one.
  bad = good;
  put_u32(bad, 12, 16);
  CHECK_THROWS_AS(decode_grid_file(bad), GridFileError);

  bad = good;
  bad.push_back(0);
  CHECK_THROWS_AS(decode_grid_file(bad), GridFileError);
}

TEST_CASE("malformed timelines are rejected") {
  Rng rng(5);
  GridTimeline tl("cam");
  tl.insert(0.0, random_pyramid(rng));
  tl.insert(1.0, random_pyramid(rng));
  const auto good = encode_timeline(tl);
  const std::size_t grid_bytes = encode_grid(tl.entries()[0].grid).size();
  const std::size_t count_at = grid_bytes + 4 + 3;

  auto bad = good;
  put_u32(bad, count_at, 3);
  CHECK_THROWS_WITH_AS(decode_grid_file(bad), doctest::Contains("length mismatch"),
                       GridFileError);

  bad = good;
  put_u32(bad, count_at, 0);
  CHECK_THROWS_AS(decode_grid_file(bad), GridFileError);

  // Swap the timestamps so they decrease.
  bad = good;
  const std::size_t entry = 8 + (grid_bytes - 48);
  const std::size_t t0 = count_at + 4;
  const std::size_t t1 = t0 + entry;
  for (int i = 0; i < 8; ++i) std::swap(bad[t0 + i], bad[t1 + i]);
  CHECK_THROWS_WITH_AS(decode_grid_file(bad), doctest::Contains("increasing"), GridFileError);
}

}  // namespace
}  // namespace msbg
