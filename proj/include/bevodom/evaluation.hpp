#pragma once

// Odometry evaluation: Umeyama alignment, ATE, fixed-length relative errors
// (RTE / RRE), first-10 m scale initialization and log2 scale-factor curves.

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "bevodom/errors.hpp"
#include "bevodom/geometry.hpp"
#include "bevodom/trajectory.hpp"

namespace bevodom {

enum class AlignMode { se3, sim3 };

struct AlignmentResult {
  Matrix3d rotation = Matrix3d::Identity();
  Vector3d translation = Vector3d::Zero();
  double scale = 1.0;

  Vector3d apply(const Vector3d& p) const { return scale * (rotation * p) + translation; }
};

namespace detail {

inline void require_same_length(const Trajectory& est, const Trajectory& gt) {
  if (est.size() != gt.size()) {
    throw ShapeError("trajectory lengths differ: " + std::to_string(est.size()) +
                     " vs " + std::to_string(gt.size()));
  }
}

}  // namespace detail

/// Closed-form least squares s * R * p_est + t ~ p_gt over index-associated
/// positions (Umeyama). SE3 fixes s = 1.
inline AlignmentResult align(const Trajectory& est, const Trajectory& gt,
                             AlignMode mode) {
  detail::require_same_length(est, gt);
  const std::size_t n = gt.size();
  if (n < 3) throw DegenerateGeometryError("alignment needs at least 3 points");

  Vector3d mu_e = Vector3d::Zero();
  Vector3d mu_g = Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_e += est.position(i);
    mu_g += gt.position(i);
  }
  mu_e /= double(n);
  mu_g /= double(n);

  Matrix3d cov = Matrix3d::Zero();
  double var_e = 0.0;
  double var_g = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector3d de = est.position(i) - mu_e;
    const Vector3d dg = gt.position(i) - mu_g;
    cov += dg * de.transpose();
    var_e += de.squaredNorm();
    var_g += dg.squaredNorm();
  }
  cov /= double(n);
  var_e /= double(n);
  var_g /= double(n);

  Eigen::JacobiSVD<Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector3d sv = svd.singularValues();
  // A unique rotation needs rank >= 2, i.e. the points must not be collinear.
  const double ref = std::sqrt(var_e * var_g);
  if (!(ref > 0.0) || sv(1) <= 1e-12 * ref) {
    throw DegenerateGeometryError(
        "alignment is not unique: positions are coincident or collinear");
  }
  Matrix3d s = Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2, 2) = -1.0;

  AlignmentResult r;
  r.rotation = svd.matrixU() * s * svd.matrixV().transpose();
  r.scale = mode == AlignMode::sim3 ? (sv.asDiagonal() * s).trace() / var_e : 1.0;
  r.translation = mu_g - r.scale * r.rotation * mu_e;
  return r;
}

/// Applies an alignment to every pose: positions get s R p + t, orientations R.
inline Trajectory apply_alignment(const Trajectory& traj, const AlignmentResult& a) {
  Trajectory out;
  out.entries.reserve(traj.size());
  for (const auto& e : traj.entries) {
    out.push_back(e.timestamp, Pose3::from_rt(a.rotation * e.pose.rotation(),
                                              a.apply(e.pose.translation()),
                                              1e-6));
  }
  return out;
}

/// RMSE of position residuals after one global alignment.
inline double ate(const Trajectory& est, const Trajectory& gt, AlignMode mode) {
  const AlignmentResult a = align(est, gt, mode);
  double sq = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    sq += (a.apply(est.position(i)) - gt.position(i)).squaredNorm();
  }
  return std::sqrt(sq / double(gt.size()));
}

// ---------------------------------------------------------------------------
// Relative errors over fixed-length sub-trajectories
// ---------------------------------------------------------------------------

inline const std::vector<double>& default_segment_lengths() {
  static const std::vector<double> lengths{100, 200, 300, 400, 500, 600, 700, 800};
  return lengths;
}

struct LengthError {
  double length_m = 0.0;
  double rte_percent = 0.0;
  double rre_deg_per_100m = 0.0;
  std::size_t segments = 0;
};

struct RelativeErrorReport {
  double rte_percent = 0.0;       // mean over lengths that have segments
  double rre_deg_per_100m = 0.0;  // mean over lengths that have segments
  std::vector<LengthError> per_length;
};

/// Error of one segment: translation norm (m) and rotation angle (rad) of
/// inverse(gt_rel) * est_rel, with rel = inverse(P[first]) * P[last].
struct SegmentError {
  double translation_m;
  double rotation_rad;
};

inline SegmentError segment_error(const Trajectory& est, const Trajectory& gt,
                                  std::size_t first, std::size_t last) {
  const Matrix4d gt_rel = gt[first].pose.inverse().matrix() * gt[last].pose.matrix();
  const Matrix4d est_rel = est[first].pose.inverse().matrix() * est[last].pose.matrix();
  Matrix4d gt_rel_inv = Matrix4d::Identity();
  gt_rel_inv.topLeftCorner<3, 3>() = gt_rel.topLeftCorner<3, 3>().transpose();
  gt_rel_inv.topRightCorner<3, 1>() =
      -gt_rel.topLeftCorner<3, 3>().transpose() * gt_rel.topRightCorner<3, 1>();
  const Matrix4d err = gt_rel_inv * est_rel;
  return {err.topRightCorner<3, 1>().norm(), rotation_angle(err.topLeftCorner<3, 3>())};
}

/// For every start frame (step `stride`) and length L, the segment ends at the
/// first frame whose accumulated gt path length reaches start + L. RTE per L is
/// the RMSE of translation error / L in percent; RRE per L the RMSE of
/// rotation error in degrees per 100 m.
inline RelativeErrorReport rte_rre(const Trajectory& est, const Trajectory& gt,
                                   const std::vector<double>& lengths = default_segment_lengths(),
                                   std::size_t stride = 1) {
  detail::require_same_length(est, gt);
  if (gt.size() < 2) throw InsufficientLengthError("need at least 2 frames");
  if (stride == 0) throw Error("stride must be >= 1");
  const std::vector<double> dist = gt.path_distances();

  RelativeErrorReport report;
  for (double len : lengths) {
    if (!(len > 0.0)) throw Error("segment lengths must be positive");
    double sq_t = 0.0;
    double sq_r = 0.0;
    std::size_t count = 0;
    for (std::size_t first = 0; first < gt.size(); first += stride) {
      const double target = dist[first] + len;
      const auto it = std::lower_bound(dist.begin() + std::ptrdiff_t(first), dist.end(), target);
      if (it == dist.end()) break;
      const std::size_t last = std::size_t(it - dist.begin());
      const SegmentError e = segment_error(est, gt, first, last);
      const double t_rel = e.translation_m / len;
      const double r_rel = rad_to_deg(e.rotation_rad) / len * 100.0;
      sq_t += t_rel * t_rel;
      sq_r += r_rel * r_rel;
      ++count;
    }
    if (count == 0) continue;
    report.per_length.push_back({len, 100.0 * std::sqrt(sq_t / double(count)),
                                 std::sqrt(sq_r / double(count)), count});
  }
  if (report.per_length.empty()) {
    throw InsufficientLengthError("trajectory is shorter than every segment length");
  }
  for (const auto& l : report.per_length) {
    report.rte_percent += l.rte_percent;
    report.rre_deg_per_100m += l.rre_deg_per_100m;
  }
  report.rte_percent /= double(report.per_length.size());
  report.rre_deg_per_100m /= double(report.per_length.size());
  return report;
}

// ---------------------------------------------------------------------------
// Scale
// ---------------------------------------------------------------------------

/// gt / est path length over the prefix ending at the first frame where the gt
/// path length reaches `prefix_m`. Multiplying est positions by it fixes the
/// scale of a scale-free estimate.
inline double scale_from_prefix(const Trajectory& est, const Trajectory& gt,
                                double prefix_m = 10.0) {
  detail::require_same_length(est, gt);
  const std::vector<double> gd = gt.path_distances();
  const auto it = std::lower_bound(gd.begin(), gd.end(), prefix_m);
  if (gd.empty() || it == gd.end()) {
    throw InsufficientLengthError("gt path is shorter than " + std::to_string(prefix_m) + " m");
  }
  const std::size_t last = std::size_t(it - gd.begin());
  double est_len = 0.0;
  for (std::size_t i = 1; i <= last; ++i) {
    est_len += (est.position(i) - est.position(i - 1)).norm();
  }
  if (!(est_len > 0.0)) {
    throw DegenerateInputError("estimated prefix has zero length; scale undefined");
  }
  return gd[last] / est_len;
}

inline double scale_from_first_10m(const Trajectory& est, const Trajectory& gt) {
  return scale_from_prefix(est, gt, 10.0);
}

struct ScaleSegment {
  std::size_t index = 0;
  std::size_t first = 0;  // frame range [first, last]
  std::size_t last = 0;
  double est_displacement_m = 0.0;
  double gt_displacement_m = 0.0;
  double log2_scale = 0.0;  // NaN when !valid
  bool valid = true;
};

/// Splits the gt path into consecutive `segment_m` pieces (boundary = first
/// frame reaching k * segment_m) and reports log2(d_est / d_gt) of the
/// endpoint displacements of each piece. Pieces with a zero displacement on
/// either side are flagged invalid.
inline std::vector<ScaleSegment> log_scale_curve(const Trajectory& est, const Trajectory& gt,
                                                 double segment_m = 10.0) {
  detail::require_same_length(est, gt);
  if (!(segment_m > 0.0)) throw Error("segment length must be positive");
  const std::vector<double> gd = gt.path_distances();
  std::vector<ScaleSegment> out;
  std::size_t first = 0;
  for (std::size_t k = 1;; ++k) {
    const auto it = std::lower_bound(gd.begin(), gd.end(), double(k) * segment_m);
    if (it == gd.end()) break;
    const std::size_t last = std::size_t(it - gd.begin());
    if (last == first) continue;
    ScaleSegment s;
    s.index = out.size();
    s.first = first;
    s.last = last;
    s.est_displacement_m = (est.position(last) - est.position(first)).norm();
    s.gt_displacement_m = (gt.position(last) - gt.position(first)).norm();
    if (s.gt_displacement_m > 0.0 && s.est_displacement_m > 0.0) {
      s.log2_scale = std::log2(s.est_displacement_m / s.gt_displacement_m);
    } else {
      s.log2_scale = std::numeric_limits<double>::quiet_NaN();
      s.valid = false;
    }
    out.push_back(s);
    first = last;
  }
  if (out.empty()) {
    throw InsufficientLengthError("trajectory does not cover one scale segment");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full report
// ---------------------------------------------------------------------------

struct MetricsReport {
  double rte_percent = 0.0;
  double rre_deg_per_100m = 0.0;
  double ate_se3_m = 0.0;
  double ate_sim3_m = 0.0;
  std::vector<LengthError> per_length;
  double scale_init = 1.0;  // factor applied to est before evaluation
  std::size_t frames = 0;
};

struct EvaluationOptions {
  std::vector<double> lengths = default_segment_lengths();
  AlignMode align_mode = AlignMode::se3;  // alignment applied before RTE/RRE
  bool scale_init_10m = false;
  std::size_t stride = 1;
};

/// Optional first-10 m rescaling, then ATE under both alignments and RTE/RRE on
/// est aligned with `align_mode`.
inline MetricsReport evaluate(const Trajectory& est_in, const Trajectory& gt,
                              const EvaluationOptions& opts = {}) {
  detail::require_same_length(est_in, gt);
  MetricsReport r;
  r.frames = gt.size();
  Trajectory est = est_in;
  if (opts.scale_init_10m) {
    r.scale_init = scale_from_first_10m(est, gt);
    est = scale_trajectory(est, r.scale_init);
  }
  r.ate_se3_m = ate(est, gt, AlignMode::se3);
  r.ate_sim3_m = ate(est, gt, AlignMode::sim3);
  const Trajectory aligned = apply_alignment(est, align(est, gt, opts.align_mode));
  const RelativeErrorReport rel = rte_rre(aligned, gt, opts.lengths, opts.stride);
  r.rte_percent = rel.rte_percent;
  r.rre_deg_per_100m = rel.rre_deg_per_100m;
  r.per_length = rel.per_length;
  return r;
}

}  // namespace bevodom
