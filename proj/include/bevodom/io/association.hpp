#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "bevodom/trajectory.hpp"

namespace bevodom::io {

using IndexPair = std::pair<std::size_t, std::size_t>;

/// Greedy nearest-timestamp matching with |dt| <= max_dt_s. Each frame is
/// used at most once and both index sequences strictly increase. A frame of
/// `a` is skipped when the next frame of `a` is a closer match for the same
/// frame of `b`.
inline std::vector<IndexPair> associate_by_timestamp(const Trajectory& a,
                                                     const Trajectory& b,
                                                     double max_dt_s) {
  std::vector<IndexPair> pairs;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size() && j < b.size(); ++i) {
    const double ta = a[i].timestamp;
    while (j + 1 < b.size() &&
           std::abs(b[j + 1].timestamp - ta) <= std::abs(b[j].timestamp - ta)) {
      ++j;
    }
    const double dt = std::abs(b[j].timestamp - ta);
    if (dt > max_dt_s) {
      if (b[j].timestamp < ta) ++j;
      continue;
    }
    if (i + 1 < a.size() && std::abs(a[i + 1].timestamp - b[j].timestamp) < dt) continue;
    pairs.emplace_back(i, j);
    ++j;
  }
  return pairs;
}

/// Restricts both trajectories to the matched pairs, index-aligned.
inline std::pair<Trajectory, Trajectory> apply_association(
    const Trajectory& a, const Trajectory& b, const std::vector<IndexPair>& pairs) {
  Trajectory ra;
  Trajectory rb;
  for (const auto& [i, j] : pairs) {
    ra.entries.push_back(a[i]);
    rb.entries.push_back(b[j]);
  }
  return {ra, rb};
}

}  // namespace bevodom::io
