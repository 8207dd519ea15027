#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "gapfilter/common.hpp"

namespace gapfilter {

/// One missing interval of the observation record: observations are absent on
/// [-offset-length, -offset]. Mirrored to the positive axis it occupies
/// [offset, offset+length].
struct MissingInterval {
  double offset;  // M > 0
  double length;  // N > 0
};

/// Where the process is observed. The record covers the negative half-line
/// except the union S of the missing intervals; the estimated functional
/// averages the process over the mirror complement R = [0,inf) \ S+ with
/// S+ = -S.
struct ObservationGeometry {
  std::vector<MissingInterval> intervals;

  /// Distance from the origin to the far edge of S (0 when S is empty).
  double depth() const {
    double d = 0.0;
    for (const auto& iv : intervals) d = std::max(d, iv.offset + iv.length);
    return d;
  }

  /// True when t >= 0 lies inside the mirrored missing set S+ (closed).
  bool in_mirror(double t) const {
    for (const auto& iv : intervals)
      if (t >= iv.offset && t <= iv.offset + iv.length) return true;
    return false;
  }

  /// Lattice-exact version: true when idx*step lies in S+ (closed).
  bool in_mirror_index(std::int64_t idx, double step) const {
    for (const auto& iv : intervals) {
      const std::int64_t m = lattice_index(iv.offset, step, "missing interval offset");
      const std::int64_t n = lattice_index(iv.length, step, "missing interval length");
      if (idx >= m && idx <= m + n) return true;
    }
    return false;
  }

  /// True when t <= 0 lies inside S (closed).
  bool in_missing(double t) const { return in_mirror(-t); }

  /// Sorts intervals by offset, then rejects non-positive or overlapping
  /// ones. Endpoints must later also fall on the lattice; that check needs a
  /// step and lives in make_grids.
  void validate() {
    for (const auto& iv : intervals) {
      if (!(iv.offset > 0.0) || !(iv.length > 0.0))
        throw validation_error("missing interval requires offset > 0 and length > 0");
    }
    std::sort(intervals.begin(), intervals.end(),
              [](const MissingInterval& a, const MissingInterval& b) { return a.offset < b.offset; });
    for (std::size_t l = 1; l < intervals.size(); ++l) {
      if (intervals[l].offset <= intervals[l - 1].offset + intervals[l - 1].length)
        throw validation_error("missing intervals overlap or touch; merge them before use");
    }
  }
};

}  // namespace gapfilter
