// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "msbg/image.hpp"

namespace msbg {

PpmError::PpmError(const std::string& what, std::size_t offset)
    : std::runtime_error("ppm: " + what + " at byte " + std::to_string(offset)),
      offset_(offset) {}

namespace {

class HeaderReader {
 public:
  HeaderReader(std::span<const unsigned char> bytes, std::size_t start)
      : bytes_(bytes), pos_(start) {}

  std::size_t pos() const { return pos_; }

  // Skips whitespace and '#' comments.
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const unsigned char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* field) {
    skip_space();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) throw PpmError(std::string(field) + " too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      throw PpmError(std::string("expected ") + field, start);
    }
    return value;
  }

  void expect_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw PpmError("expected whitespace after maxval", pos_);
    }
    ++pos_;
  }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_;
};

}  // namespace

Image decode_ppm(std::span<const unsigned char> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw PpmError("bad magic (expected P6)", 0);
  }
  HeaderReader reader(bytes, 2);
  const long width = reader.read_uint("width");
  const long height = reader.read_uint("height");
  reader.skip_space();
  const std::size_t maxval_offset = reader.pos();
  const long maxval = reader.read_uint("maxval");
  if (maxval != 255) {
    throw PpmError("unsupported maxval " + std::to_string(maxval), maxval_offset);
  }
  reader.expect_single_space();
  const std::size_t payload = reader.pos();
  const std::size_t need = static_cast<std::size_t>(width) * height * 3;
  if (bytes.size() - payload < need) {
    throw PpmError("truncated payload (need " + std::to_string(need) +
                       " bytes, have " + std::to_string(bytes.size() - payload) + ")",
                   bytes.size());
  }
  Image img(static_cast<int>(height), static_cast<int>(width));
  auto out = img.data();
  for (std::size_t i = 0; i < need; ++i) {
    out[i] = static_cast<float>(bytes[payload + i]) / 255.0f;
  }
  return img;
}

std::vector<unsigned char> encode_ppm(const Image& img) {
  const std::string header = "P6\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + img.data().size());
  for (float v : img.data()) {
    const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
    out.push_back(static_cast<unsigned char>(std::floor(clamped * 255.0 + 0.5)));
  }
  return out;
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

void write_ppm(const Image& img, const std::filesystem::path& path) {
  const auto bytes = encode_ppm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace msbg
