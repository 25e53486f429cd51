// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "msbg/gridfile.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace msbg {

GridFileError::GridFileError(const std::string& what, std::size_t offset)
    : std::runtime_error("grid file: " + what + " at byte " + std::to_string(offset)),
      offset_(offset) {}

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<unsigned char> take() { return std::move(out_); }

 private:
  std::vector<unsigned char> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> b) : b_(b) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return b_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw GridFileError(std::string("truncated ") + what, pos_);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const unsigned char> b_;
  std::size_t pos_ = 0;
};

void write_header(Writer& w, const MultiScaleGrid& msg) {
  w.bytes("MSBG");
  w.u32(kGridFileVersion);
  w.u32(static_cast<std::uint32_t>(msg.levels.size()));
  for (const auto& g : msg.levels) {
    w.u32(static_cast<std::uint32_t>(g.h()));
    w.u32(static_cast<std::uint32_t>(g.w()));
    w.u32(static_cast<std::uint32_t>(g.d()));
  }
}

void write_payload(Writer& w, const MultiScaleGrid& msg) {
  for (const auto& g : msg.levels) {
    for (double v : g.values()) w.f32(static_cast<float>(v));
  }
}

std::size_t payload_bytes(const std::vector<GridShape>& shapes) {
  std::size_t n = 0;
  for (const auto& s : shapes) {
    n += static_cast<std::size_t>(s.h) * s.w * s.d * kCoeffs * 4;
  }
  return n;
}

MultiScaleGrid read_payload(Reader& r, const std::vector<GridShape>& shapes) {
  r.need(payload_bytes(shapes), "coefficient payload");
  MultiScaleGrid msg;
  for (const auto& s : shapes) {
    BilateralGrid g(s.h, s.w, s.d);
    for (double& v : g.values()) {
      const std::size_t at = r.pos();
      const float f = r.f32("coefficient payload");
      if (!std::isfinite(f)) throw GridFileError("non-finite coefficient", at);
      v = f;
    }
    msg.levels.push_back(std::move(g));
  }
  msg.factors = default_factors_for(shapes.size());
  return msg;
}

}  // namespace

std::vector<GuidanceFactors> default_factors_for(std::size_t levels) {
  if (levels == 1) return {{1, 1}};
  return std::vector<GuidanceFactors>(levels, GuidanceFactors{2, 2});
}

std::vector<unsigned char> encode_grid(const MultiScaleGrid& msg) {
  msg.validate();
  Writer w;
  write_header(w, msg);
  write_payload(w, msg);
  return w.take();
}

std::vector<unsigned char> encode_timeline(const GridTimeline& tl) {
  if (tl.empty()) throw std::invalid_argument("cannot encode an empty timeline");
  const MultiScaleGrid& first = tl.entries().front().grid;
  Writer w;
  write_header(w, first);
  write_payload(w, first);
  w.u32(static_cast<std::uint32_t>(tl.camera_id().size()));
  w.bytes(tl.camera_id());
  w.u32(static_cast<std::uint32_t>(tl.entries().size()));
  for (const auto& e : tl.entries()) {
    w.f64(e.timestamp);
    write_payload(w, e.grid);
  }
  return w.take();
}

GridFileContents decode_grid_file(std::span<const unsigned char> bytes) {
  Reader r(bytes);
  if (r.str(std::min<std::size_t>(4, bytes.size()), "magic") != "MSBG") {
    throw GridFileError("bad magic (expected MSBG)", 0);
  }
  const std::uint32_t version = r.u32("version");
  if (version != kGridFileVersion) {
    throw GridFileError("unsupported version " + std::to_string(version), 4);
  }
  const std::size_t levels_at = r.pos();
  const std::uint32_t levels = r.u32("level count");
  if (levels == 0 || levels > 64) {
    throw GridFileError("implausible level count " + std::to_string(levels), levels_at);
  }
  std::vector<GridShape> shapes;
  for (std::uint32_t l = 0; l < levels; ++l) {
    const std::size_t at = r.pos();
    GridShape s;
    s.h = static_cast<int>(r.u32("level dims"));
    s.w = static_cast<int>(r.u32("level dims"));
    s.d = static_cast<int>(r.u32("level dims"));
    if (s.h < 1 || s.w < 1 || s.d < 1 || s.h > 4096 || s.w > 4096 || s.d > 4096) {
      throw GridFileError("invalid level dims", at);
    }
    shapes.push_back(s);
  }
  GridFileContents out;
  out.grid = read_payload(r, shapes);
  try {
    out.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw GridFileError(e.what(), levels_at);
  }
  if (r.remaining() == 0) return out;

  const std::uint32_t id_len = r.u32("camera id length");
  GridTimeline tl(r.str(id_len, "camera id"));
  const std::size_t count_at = r.pos();
  const std::uint32_t count = r.u32("entry count");
  if (count == 0) throw GridFileError("timeline without entries", count_at);
  const std::size_t entry_bytes = 8 + payload_bytes(shapes);
  if (r.remaining() != static_cast<std::size_t>(count) * entry_bytes) {
    throw GridFileError("timeline payload length mismatch (expected " +
                            std::to_string(static_cast<std::size_t>(count) * entry_bytes) +
                            " bytes, have " + std::to_string(r.remaining()) + ")",
                        r.pos());
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = r.pos();
    const double t = r.f64("timestamp");
    MultiScaleGrid g = read_payload(r, shapes);
    try {
      tl.insert(t, std::move(g));
    } catch (const std::invalid_argument& e) {
      throw GridFileError(e.what(), at);
    }
    if (tl.entries().back().timestamp != t) {
      throw GridFileError("timeline timestamps are not increasing", at);
    }
  }
  out.timeline = std::move(tl);
  return out;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(std::span<const unsigned char> bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

MultiScaleGrid read_grid(const std::filesystem::path& path) {
  return decode_grid_file(read_bytes(path)).grid;
}

GridTimeline read_timeline(const std::filesystem::path& path) {
  auto contents = decode_grid_file(read_bytes(path));
  if (!contents.timeline) {
    throw GridFileError(path.string() + " has no timeline section", 0);
  }
  return std::move(*contents.timeline);
}

void write_grid(const MultiScaleGrid& msg, const std::filesystem::path& path) {
  write_bytes(encode_grid(msg), path);
}

void write_timeline(const GridTimeline& tl, const std::filesystem::path& path) {
  write_bytes(encode_timeline(tl), path);
}

}  // namespace msbg
