#pragma once

#include <cmath>

#include "bevodom/errors.hpp"
#include "bevodom/geometry.hpp"

namespace bevodom {

struct LossWeights {
  double alpha = 10.0;   // rotation weight of the planar pose loss
  double beta = 10.0;    // rotation weight of the direction-only pose loss
  double lambda1 = 1.0;  // weight of the direction-only pose loss in the total
  double lambda2 = 1.0;  // weight of the flow loss in the total

  void validate() const {
    if (!(alpha >= 0.0 && beta >= 0.0 && lambda1 >= 0.0 && lambda2 >= 0.0)) {
      throw Error("loss weights must be >= 0");
    }
  }
};

/// |dtx| + |dty| + alpha * |wrap(dtheta)|.
inline double loss_3dof(const Pose2& pred, const Pose2& gt, double alpha = 10.0) {
  return std::abs(pred.tx - gt.tx) + std::abs(pred.ty - gt.ty) +
         alpha * std::abs(wrap_angle(pred.theta - gt.theta));
}

/// L1 distance of unit translation directions plus beta times the Frobenius
/// distance of the rotations. Zero-length translations have no direction and
/// are rejected.
inline double loss_5dof(const Vector3d& pred_t, const Matrix3d& pred_r,
                        const Vector3d& gt_t, const Matrix3d& gt_r,
                        double beta = 10.0) {
  const double np = pred_t.norm();
  const double ng = gt_t.norm();
  if (!(np > 0.0) || !(ng > 0.0)) {
    throw DegenerateInputError("translation direction undefined for a zero vector");
  }
  const Vector3d dir = pred_t / np - gt_t / ng;
  return dir.cwiseAbs().sum() + beta * (pred_r - gt_r).norm();
}

inline double loss_total(double l3, double l5, double lflow, const LossWeights& w) {
  return l3 + w.lambda1 * l5 + w.lambda2 * lflow;
}

}  // namespace bevodom
