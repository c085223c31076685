#pragma once

// Pose algebra for SE(3) and the planar (yaw, tx, ty) reduction, plus the
// metric BEV grid and its pixel <-> vehicle mapping.
//
// Vehicle frame: x forward, y along increasing pixel column. A BEV pixel
// (u = column, v = row) maps to x = (o_y - v) * r, y = (u - o_x) * r, z = 0.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "bevodom/errors.hpp"

namespace bevodom {

using Eigen::Matrix3d;
using Eigen::Matrix4d;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::Vector4d;

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi]. Angles already inside the interval are
/// returned unchanged.
inline double wrap_angle(double rad) {
  double r = std::remainder(rad, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

/// Max-abs deviation of R^T R from identity.
inline double orthonormality_error(const Matrix3d& r) {
  return (r.transpose() * r - Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

/// Nearest proper rotation to `m` in the Frobenius sense (polar factor).
inline Matrix3d nearest_rotation(const Matrix3d& m) {
  Eigen::JacobiSVD<Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3d d = Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0
                ? -1.0
                : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

inline Matrix3d rot_z(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Matrix3d r;
  // clang-format off
  r << c, -s, 0.0,
       s,  c, 0.0,
       0.0, 0.0, 1.0;
  // clang-format on
  return r;
}

/// Rotation angle of R in [0, pi]. Same value as acos((trace - 1) / 2), taken
/// as atan2 of the skew part against the trace so that it stays accurate near 0.
inline double rotation_angle(const Matrix3d& r) {
  const double c = (r.trace() - 1.0) * 0.5;
  const double s = 0.5 * Vector3d(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)).norm();
  return std::atan2(s, c);
}

// ---------------------------------------------------------------------------
// Pose2
// ---------------------------------------------------------------------------

/// Planar rigid motion. `theta` is always wrapped into (-pi, pi].
struct Pose2 {
  double theta = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Pose2() = default;
  Pose2(double theta_rad, double tx_m, double ty_m)
      : theta(wrap_angle(theta_rad)), tx(tx_m), ty(ty_m) {}

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

// ---------------------------------------------------------------------------
// Pose3
// ---------------------------------------------------------------------------

/// Rigid transform in SE(3) as a 4x4 homogeneous matrix.
///
/// A Pose3 built from a Pose2 remembers the yaw it was built from, so that
/// the planar projection returns it bit-exactly (atan2(sin t, cos t) is not
/// always t in floating point). Every other operation drops the hint.
class Pose3 {
 public:
  static constexpr double kTolerance = 1e-9;

  Pose3() : m_(Matrix4d::Identity()) {}

  /// Validates `m` as a rigid transform within `tolerance` and snaps the
  /// rotation block to the nearest rotation when it drifts by more than 1e-9.
  static Pose3 from_matrix(const Matrix4d& m, double tolerance = kTolerance) {
    if (!m.allFinite()) throw InvalidPoseError("pose has non-finite entries");
    if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
      throw InvalidPoseError("pose bottom row must be (0, 0, 0, 1)");
    }
    return from_rt(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>(),
                   tolerance);
  }

  static Pose3 from_rt(const Matrix3d& r, const Vector3d& t,
                       double tolerance = kTolerance) {
    if (!r.allFinite() || !t.allFinite()) {
      throw InvalidPoseError("pose has non-finite entries");
    }
    const double drift = orthonormality_error(r);
    if (drift > tolerance) {
      throw InvalidPoseError("rotation block is not orthonormal (drift " +
                             std::to_string(drift) + ")");
    }
    if (r.determinant() <= 0.0) {
      throw InvalidPoseError("rotation block has negative determinant");
    }
    Pose3 p;
    p.m_.topLeftCorner<3, 3>() = drift > kTolerance ? nearest_rotation(r) : r;
    p.m_.topRightCorner<3, 1>() = t;
    return p;
  }

  static Pose3 from_translation(const Vector3d& t) {
    Pose3 p;
    p.m_.topRightCorner<3, 1>() = t;
    return p;
  }

  const Matrix4d& matrix() const noexcept { return m_; }
  Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Vector3d translation() const { return m_.topRightCorner<3, 1>(); }

  std::optional<double> planar_yaw_hint() const noexcept { return yaw_hint_; }

  Pose3 inverse() const {
    Pose3 p;
    const Matrix3d rt = rotation().transpose();
    p.m_.topLeftCorner<3, 3>() = rt;
    p.m_.topRightCorner<3, 1>() = -rt * translation();
    return p;
  }

  Vector3d transform_point(const Vector3d& x) const {
    return rotation() * x + translation();
  }

  friend bool operator==(const Pose3& a, const Pose3& b) { return a.m_ == b.m_; }

 private:
  friend Pose3 pose2_to_pose3(const Pose2& p);
  friend Pose3 compose(const Pose3& a, const Pose3& b);

  Matrix4d m_;
  std::optional<double> yaw_hint_;
};

/// a * b. The rotation block is re-projected onto SO(3) if the product has
/// drifted by more than 1e-9.
inline Pose3 compose(const Pose3& a, const Pose3& b) {
  Pose3 p;
  p.m_ = a.m_ * b.m_;
  p.m_.row(3) << 0.0, 0.0, 0.0, 1.0;
  const Matrix3d r = p.rotation();
  if (orthonormality_error(r) > Pose3::kTolerance) {
    p.m_.topLeftCorner<3, 3>() = nearest_rotation(r);
  }
  return p;
}

/// Pose of `b` expressed in the frame of `a`: inverse(a) * b.
inline Pose3 relative_pose(const Pose3& a, const Pose3& b) {
  return compose(a.inverse(), b);
}

/// Drops z, roll and pitch; yaw is atan2 of the first rotation column.
inline Pose2 pose3_to_pose2(const Pose3& p) {
  const Matrix4d& m = p.matrix();
  const double yaw = p.planar_yaw_hint().value_or(std::atan2(m(1, 0), m(0, 0)));
  return Pose2(yaw, m(0, 3), m(1, 3));
}

inline Pose3 pose2_to_pose3(const Pose2& p) {
  Pose3 out;
  out.m_.topLeftCorner<3, 3>() = rot_z(p.theta);
  out.m_(0, 3) = p.tx;
  out.m_(1, 3) = p.ty;
  out.yaw_hint_ = p.theta;
  return out;
}

// ---------------------------------------------------------------------------
// BEV grid
// ---------------------------------------------------------------------------

struct BevGridSpec {
  int height_px = 128;
  int width_px = 128;
  double resolution_m = 0.8;
  double origin_x_px = 63.5;  // column of the vehicle origin
  double origin_y_px = 63.5;  // row of the vehicle origin

  /// Grid with its origin at the geometric center ((W-1)/2, (H-1)/2).
  static BevGridSpec centered(int height, int width, double resolution) {
    BevGridSpec g{height, width, resolution, (width - 1) / 2.0,
                  (height - 1) / 2.0};
    g.validate();
    return g;
  }

  static BevGridSpec with_origin(int height, int width, double resolution,
                                 double origin_x, double origin_y) {
    BevGridSpec g{height, width, resolution, origin_x, origin_y};
    g.validate();
    return g;
  }

  void validate() const {
    if (height_px < 1 || width_px < 1) {
      throw ShapeError("BEV grid dimensions must be >= 1");
    }
    if (!(resolution_m > 0.0) || !std::isfinite(resolution_m)) {
      throw Error("BEV grid resolution must be positive");
    }
    if (!std::isfinite(origin_x_px) || !std::isfinite(origin_y_px)) {
      throw Error("BEV grid origin must be finite");
    }
  }

  std::size_t cell_count() const {
    return static_cast<std::size_t>(height_px) * static_cast<std::size_t>(width_px);
  }

  friend bool operator==(const BevGridSpec&, const BevGridSpec&) = default;
};

/// Homogeneous vehicle coordinates of BEV pixel (u = column, v = row).
inline Vector4d pixel_to_vehicle(double u, double v, const BevGridSpec& grid) {
  return {(grid.origin_y_px - v) * grid.resolution_m,
          (u - grid.origin_x_px) * grid.resolution_m, 0.0, 1.0};
}

/// Inverse of pixel_to_vehicle on the planar components. Returns (u, v),
/// real-valued and possibly outside the grid.
inline Vector2d vehicle_to_pixel(const Vector4d& p, const BevGridSpec& grid) {
  double x = p.x();
  double y = p.y();
  if (p.w() != 1.0) {
    if (p.w() == 0.0) {
      throw DegenerateInputError("cannot project a point at infinity");
    }
    x /= p.w();
    y /= p.w();
  }
  return {y / grid.resolution_m + grid.origin_x_px,
          grid.origin_y_px - x / grid.resolution_m};
}

// ---------------------------------------------------------------------------
// Camera
// ---------------------------------------------------------------------------

/// Pinhole intrinsics K and camera-to-vehicle extrinsics E = [R | t].
class CameraModel {
 public:
  CameraModel(const Matrix3d& intrinsics, const Eigen::Matrix<double, 3, 4>& extrinsics)
      : k_(intrinsics), e_(extrinsics) {
    validate();
  }

  const Matrix3d& intrinsics() const noexcept { return k_; }
  const Eigen::Matrix<double, 3, 4>& extrinsics() const noexcept { return e_; }
  Matrix3d extrinsic_rotation() const { return e_.leftCols<3>(); }
  Vector3d extrinsic_translation() const { return e_.col(3); }

 private:
  void validate() const {
    if (!k_.allFinite() || !e_.allFinite()) {
      throw InvalidCameraError("camera parameters must be finite");
    }
    if (k_(1, 0) != 0.0 || k_(2, 0) != 0.0 || k_(2, 1) != 0.0) {
      throw InvalidCameraError("intrinsics must be upper-triangular");
    }
    if (!(k_(0, 0) > 0.0 && k_(1, 1) > 0.0 && k_(2, 2) > 0.0)) {
      throw InvalidCameraError("intrinsics must have a positive diagonal");
    }
    const Matrix3d r = extrinsic_rotation();
    if (orthonormality_error(r) > 1e-9 || r.determinant() <= 0.0) {
      throw InvalidCameraError("extrinsic rotation is not a proper rotation");
    }
  }

  Matrix3d k_;
  Eigen::Matrix<double, 3, 4> e_;
};

}  // namespace bevodom
