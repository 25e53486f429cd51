// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "msbg/grid.hpp"

namespace msbg {

class DegenerateIntervalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Weight of the t1 entry: (t2 - t_novel) / (t2 - t1).
double interp_weight(double t1, double t2, double t_novel);

struct TimelineEntry {
  double timestamp = 0.0;
  MultiScaleGrid grid;
};

// Levels below this index are interpolated; the rest follow FinePolicy.
inline constexpr std::size_t kInterpolatedLevels = 2;

enum class FinePolicy { kIdentity, kNearest };
FinePolicy parse_fine_policy(std::string_view s);
const char* fine_policy_name(FinePolicy p);

class GridTimeline {
 public:
  GridTimeline() = default;
  explicit GridTimeline(std::string camera_id) : camera_id_(std::move(camera_id)) {}

  const std::string& camera_id() const { return camera_id_; }
  const std::vector<TimelineEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // Inserts keeping timestamps strictly increasing. Throws on a duplicate
  // timestamp or a pyramid shape differing from existing entries.
  void insert(double timestamp, MultiScaleGrid grid);

  MultiScaleGrid interpolate(double t_novel,
                             FinePolicy policy = FinePolicy::kIdentity) const;

 private:
  std::string camera_id_;
  std::vector<TimelineEntry> entries_;
};

}  // namespace msbg
