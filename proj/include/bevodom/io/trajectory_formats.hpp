#pragma once

// Text trajectory formats.
//   KITTI: 12 reals per line, row-major [R | t]; no timestamps (frame index
//          or a companion times file, one timestamp per line).
//   TUM:   "timestamp tx ty tz qx qy qz qw".
//   CSV:   "timestamp,tx,ty,tz,qx,qy,qz,qw", optional header line starting
//          with a non-numeric field.
// Blank lines and lines starting with '#' are skipped. "\r\n" is accepted.

#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bevodom/errors.hpp"
#include "bevodom/geometry.hpp"
#include "bevodom/io/text.hpp"
#include "bevodom/trajectory.hpp"

namespace bevodom::io {

inline constexpr double kFileRotationTolerance = 1e-4;
inline constexpr double kQuaternionTolerance = 1e-4;

enum class TrajectoryFormat { kitti, tum, csv };

namespace detail {

inline bool skip_line(std::string_view line) {
  return is_blank(line) || line.find_first_not_of(" \t") == line.find('#');
}

inline Pose3 pose_or_parse_error(const Matrix3d& r, const Vector3d& t, std::size_t line) {
  try {
    return Pose3::from_rt(r, t, kFileRotationTolerance);
  } catch (const InvalidPoseError& e) {
    throw ParseError(line, e.what());
  }
}

inline Pose3 pose_from_quaternion(double tx, double ty, double tz, double qx, double qy,
                                  double qz, double qw, std::size_t line) {
  const double n = std::sqrt(qx * qx + qy * qy + qz * qz + qw * qw);
  if (std::abs(n - 1.0) > kQuaternionTolerance) {
    throw ParseError(line, "quaternion is not unit length (norm " + format_double(n) + ")");
  }
  Eigen::Quaterniond q(qw, qx, qy, qz);
  if (n != 1.0) q.normalize();
  return pose_or_parse_error(q.toRotationMatrix(), Vector3d(tx, ty, tz), line);
}

inline void append_quaternion_fields(std::string& out, const TimedPose& e, char sep) {
  Eigen::Quaterniond q(e.pose.rotation());
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vector3d t = e.pose.translation();
  const double f[8] = {e.timestamp, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()};
  for (int i = 0; i < 8; ++i) {
    if (i) out += sep;
    out += format_double(f[i]);
  }
  out += '\n';
}

inline void require_increasing(const Trajectory& traj, double t, std::size_t line) {
  if (!traj.empty() && !(t > traj.entries.back().timestamp)) {
    throw ParseError(line, "timestamps must be strictly increasing");
  }
}

}  // namespace detail

/// One timestamp per non-blank line.
inline std::vector<double> parse_times(std::string_view text) {
  std::vector<double> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::skip_line(lines[i])) continue;
    const auto f = split_fields(lines[i]);
    if (f.size() != 1) throw ParseError(i + 1, "expected a single timestamp");
    out.push_back(parse_double(f[0], i + 1));
  }
  return out;
}

inline Trajectory parse_kitti_poses(std::string_view text,
                                    const std::optional<std::vector<double>>& times = {}) {
  Trajectory traj;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (detail::skip_line(lines[i])) continue;
    const auto f = split_fields(lines[i]);
    if (f.size() != 12) {
      throw ParseError(lineno, "expected 12 fields, got " + std::to_string(f.size()));
    }
    double v[12];
    for (int k = 0; k < 12; ++k) v[k] = parse_double(f[std::size_t(k)], lineno);
    Matrix3d r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    const Vector3d t(v[3], v[7], v[11]);
    const std::size_t frame = traj.size();
    double stamp = double(frame);
    if (times) {
      if (frame >= times->size()) {
        throw ParseError(lineno, "times file has fewer entries than the pose file");
      }
      stamp = (*times)[frame];
    }
    detail::require_increasing(traj, stamp, lineno);
    traj.push_back(stamp, detail::pose_or_parse_error(r, t, lineno));
  }
  if (times && times->size() != traj.size()) {
    throw ParseError(0, "times file has " + std::to_string(times->size()) +
                            " entries but the pose file has " +
                            std::to_string(traj.size()));
  }
  return traj;
}

inline std::string write_kitti(const Trajectory& traj) {
  std::string out;
  for (const auto& e : traj.entries) {
    const Matrix4d& m = e.pose.matrix();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        if (r || c) out += ' ';
        out += format_double(m(r, c));
      }
    }
    out += '\n';
  }
  return out;
}

inline Trajectory parse_tum(std::string_view text) {
  Trajectory traj;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (detail::skip_line(lines[i])) continue;
    const auto f = split_fields(lines[i]);
    if (f.size() != 8) {
      throw ParseError(lineno, "expected 8 fields, got " + std::to_string(f.size()));
    }
    double v[8];
    for (int k = 0; k < 8; ++k) v[k] = parse_double(f[std::size_t(k)], lineno);
    detail::require_increasing(traj, v[0], lineno);
    traj.push_back(v[0], detail::pose_from_quaternion(v[1], v[2], v[3], v[4], v[5], v[6],
                                                      v[7], lineno));
  }
  return traj;
}

/// Quaternions are written with qw >= 0.
inline std::string write_tum(const Trajectory& traj) {
  std::string out;
  for (const auto& e : traj.entries) detail::append_quaternion_fields(out, e, ' ');
  return out;
}

inline Trajectory parse_csv_trajectory(std::string_view text) {
  Trajectory traj;
  const auto lines = split_lines(text);
  bool first_content = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (detail::skip_line(lines[i])) continue;
    const auto f = split_csv(lines[i]);
    if (first_content) {
      first_content = false;
      double probe;
      const auto [p, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), probe);
      if (ec != std::errc{}) continue;  // header
    }
    if (f.size() != 8) {
      throw ParseError(lineno, "expected 8 fields, got " + std::to_string(f.size()));
    }
    double v[8];
    for (int k = 0; k < 8; ++k) v[k] = parse_double(f[std::size_t(k)], lineno);
    detail::require_increasing(traj, v[0], lineno);
    traj.push_back(v[0], detail::pose_from_quaternion(v[1], v[2], v[3], v[4], v[5], v[6],
                                                      v[7], lineno));
  }
  return traj;
}

inline std::string write_csv_trajectory(const Trajectory& traj) {
  std::string out = "timestamp,tx,ty,tz,qx,qy,qz,qw\n";
  for (const auto& e : traj.entries) detail::append_quaternion_fields(out, e, ',');
  return out;
}

inline Trajectory parse_trajectory(std::string_view text, TrajectoryFormat fmt) {
  switch (fmt) {
    case TrajectoryFormat::kitti: return parse_kitti_poses(text);
    case TrajectoryFormat::tum: return parse_tum(text);
    case TrajectoryFormat::csv: return parse_csv_trajectory(text);
  }
  throw Error("unknown trajectory format");
}

inline std::string write_trajectory(const Trajectory& traj, TrajectoryFormat fmt) {
  switch (fmt) {
    case TrajectoryFormat::kitti: return write_kitti(traj);
    case TrajectoryFormat::tum: return write_tum(traj);
    case TrajectoryFormat::csv: return write_csv_trajectory(traj);
  }
  throw Error("unknown trajectory format");
}

inline TrajectoryFormat trajectory_format_from_string(std::string_view s) {
  if (s == "kitti") return TrajectoryFormat::kitti;
  if (s == "tum") return TrajectoryFormat::tum;
  if (s == "csv") return TrajectoryFormat::csv;
  throw Error("unknown trajectory format '" + std::string(s) + "'");
}

}  // namespace bevodom::io
