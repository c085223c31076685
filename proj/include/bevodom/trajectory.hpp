#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bevodom/errors.hpp"
#include "bevodom/geometry.hpp"

namespace bevodom {

struct TimedPose {
  double timestamp = 0.0;
  Pose3 pose;
};

/// Timestamped world-frame poses, ordered by time.
struct Trajectory {
  std::vector<TimedPose> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  const TimedPose& operator[](std::size_t i) const { return entries[i]; }

  void push_back(double t, const Pose3& p) { entries.push_back({t, p}); }

  Vector3d position(std::size_t i) const { return entries[i].pose.translation(); }

  /// Throws unless timestamps strictly increase.
  void validate_timestamps() const {
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (!(entries[i].timestamp > entries[i - 1].timestamp)) {
        throw Error("trajectory timestamps must be strictly increasing (index " +
                    std::to_string(i) + ")");
      }
    }
  }

  /// Cumulative path length through the positions; element 0 is 0.
  std::vector<double> path_distances() const {
    std::vector<double> d(entries.size(), 0.0);
    for (std::size_t i = 1; i < entries.size(); ++i) {
      d[i] = d[i - 1] + (position(i) - position(i - 1)).norm();
    }
    return d;
  }
};

/// Applies `t` on the left of every pose: world frame change.
inline Trajectory transform_trajectory(const Trajectory& traj, const Pose3& t) {
  Trajectory out;
  out.entries.reserve(traj.size());
  for (const auto& e : traj.entries) out.push_back(e.timestamp, compose(t, e.pose));
  return out;
}

/// Scales every position by `s` about the world origin; rotations kept.
inline Trajectory scale_trajectory(const Trajectory& traj, double s) {
  Trajectory out;
  out.entries.reserve(traj.size());
  for (const auto& e : traj.entries) {
    out.push_back(e.timestamp,
                  Pose3::from_rt(e.pose.rotation(), s * e.pose.translation()));
  }
  return out;
}

}  // namespace bevodom
