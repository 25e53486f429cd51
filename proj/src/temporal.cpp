// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "msbg/temporal.hpp"

#include <algorithm>
#include <cmath>

namespace msbg {

double interp_weight(double t1, double t2, double t_novel) {
  if (t1 == t2) {
    throw DegenerateIntervalError("interp_weight: t1 == t2 (" + std::to_string(t1) + ")");
  }
  if (!(t1 < t2)) throw std::invalid_argument("interp_weight: requires t1 < t2");
  if (!(t_novel >= t1 && t_novel <= t2)) {
    throw OutOfRangeError("interp_weight: t_novel " + std::to_string(t_novel) +
                          " outside [" + std::to_string(t1) + ", " +
                          std::to_string(t2) + "]");
  }
  return (t2 - t_novel) / (t2 - t1);
}

FinePolicy parse_fine_policy(std::string_view s) {
  if (s == "identity") return FinePolicy::kIdentity;
  if (s == "nearest") return FinePolicy::kNearest;
  throw std::invalid_argument("fine_policy must be identity or nearest, got '" +
                              std::string(s) + "'");
}

const char* fine_policy_name(FinePolicy p) {
  return p == FinePolicy::kIdentity ? "identity" : "nearest";
}

void GridTimeline::insert(double timestamp, MultiScaleGrid grid) {
  if (!std::isfinite(timestamp)) throw std::invalid_argument("timestamp must be finite");
  grid.validate();
  if (!entries_.empty() && grid.shapes() != entries_.front().grid.shapes()) {
    throw std::invalid_argument("timeline entries must share pyramid shapes");
  }
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), timestamp,
      [](const TimelineEntry& e, double t) { return e.timestamp < t; });
  if (it != entries_.end() && it->timestamp == timestamp) {
    throw std::invalid_argument("duplicate timestamp " + std::to_string(timestamp));
  }
  entries_.insert(it, TimelineEntry{timestamp, std::move(grid)});
}

namespace {

MultiScaleGrid with_fine_levels(const MultiScaleGrid& src, const MultiScaleGrid& nearest,
                                FinePolicy policy) {
  MultiScaleGrid out = src;
  for (std::size_t l = kInterpolatedLevels; l < out.levels.size(); ++l) {
    const auto& g = out.levels[l];
    out.levels[l] = policy == FinePolicy::kIdentity ? BilateralGrid(g.h(), g.w(), g.d())
                                                    : nearest.levels[l];
  }
  return out;
}

}  // namespace

MultiScaleGrid GridTimeline::interpolate(double t_novel, FinePolicy policy) const {
  if (entries_.empty()) throw std::invalid_argument("interpolate: empty timeline");
  if (t_novel <= entries_.front().timestamp) {
    return with_fine_levels(entries_.front().grid, entries_.front().grid, policy);
  }
  if (t_novel >= entries_.back().timestamp) {
    return with_fine_levels(entries_.back().grid, entries_.back().grid, policy);
  }
  auto hi = std::lower_bound(
      entries_.begin(), entries_.end(), t_novel,
      [](const TimelineEntry& e, double t) { return e.timestamp < t; });
  if (hi->timestamp == t_novel) return with_fine_levels(hi->grid, hi->grid, policy);
  auto lo = std::prev(hi);
  const double w = interp_weight(lo->timestamp, hi->timestamp, t_novel);
  const auto& nearest =
      (t_novel - lo->timestamp) <= (hi->timestamp - t_novel) ? lo->grid : hi->grid;
  MultiScaleGrid out = with_fine_levels(lo->grid, nearest, policy);
  const std::size_t n = std::min(kInterpolatedLevels, out.levels.size());
  for (std::size_t l = 0; l < n; ++l) {
    auto dst = out.levels[l].values();
    auto a = lo->grid.levels[l].values();
    auto b = hi->grid.levels[l].values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = w * a[i] + (1.0 - w) * b[i];
    }
  }
  return out;
}

}  // namespace msbg
