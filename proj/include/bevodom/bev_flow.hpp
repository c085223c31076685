#pragma once

// Dense BEV optical flow constructed from a planar relative pose, and the
// closed-form inverse that recovers the pose from a flow field.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bevodom/geometry.hpp"
#include "bevodom/tensor.hpp"

namespace bevodom {

/// 2 x H x W displacement field on a BEV grid, in pixels. Channel 0 is du
/// (columns), channel 1 is dv (rows); indexing is (channel, row, column).
/// Flow is forward: a pixel at frame t moves to (u + du, v + dv) at t + 1.
class FlowField {
 public:
  explicit FlowField(const BevGridSpec& grid)
      : grid_(grid),
        data_({2, static_cast<std::size_t>(grid.height_px),
               static_cast<std::size_t>(grid.width_px)}) {
    grid_.validate();
  }

  FlowField(const BevGridSpec& grid, TensorD data)
      : grid_(grid), data_(std::move(data)) {
    grid_.validate();
    const Shape expected{2, static_cast<std::size_t>(grid.height_px),
                         static_cast<std::size_t>(grid.width_px)};
    if (data_.shape() != expected) {
      throw ShapeError("flow tensor " + shape_string(data_.shape()) +
                       " does not match grid " + shape_string(expected));
    }
    for (double x : data_.values()) {
      if (!std::isfinite(x)) throw Error("flow field has non-finite entries");
    }
  }

  const BevGridSpec& grid() const noexcept { return grid_; }
  const TensorD& tensor() const noexcept { return data_; }
  int height() const noexcept { return grid_.height_px; }
  int width() const noexcept { return grid_.width_px; }

  double& du(int row, int col) { return data_(0, row, col); }
  double& dv(int row, int col) { return data_(1, row, col); }
  double du(int row, int col) const { return data_(0, row, col); }
  double dv(int row, int col) const { return data_(1, row, col); }

 private:
  BevGridSpec grid_;
  TensorD data_;
};

/// Flow of `t_rel` at a real-valued pixel location (u, v).
///
/// Evaluates P(T * p_veh(u, v)) - (u, v) with the vehicle displacement
/// (R - I) p + t formed first, so that a pure translation yields an exactly
/// constant field and the identity yields exact zeros.
inline Vector2d flow_at(const Pose2& t_rel, const BevGridSpec& grid, double u,
                        double v) {
  const Vector4d p = pixel_to_vehicle(u, v, grid);
  const double s = std::sin(t_rel.theta);
  const double half = std::sin(0.5 * t_rel.theta);
  const double c_minus_1 = -2.0 * half * half;
  const double dx = c_minus_1 * p.x() - s * p.y() + t_rel.tx;
  const double dy = s * p.x() + c_minus_1 * p.y() + t_rel.ty;
  // + 0.0 folds negative zeros.
  return {dy / grid.resolution_m + 0.0, -dx / grid.resolution_m + 0.0};
}

/// Ground-truth flow at every integer pixel of the grid. No clipping: flow
/// may point outside the grid.
inline FlowField construct_flow_gt(const Pose2& t_rel, const BevGridSpec& grid) {
  FlowField flow(grid);
  for (int v = 0; v < grid.height_px; ++v) {
    for (int u = 0; u < grid.width_px; ++u) {
      const Vector2d f = flow_at(t_rel, grid, u, v);
      flow.du(v, u) = f.x();
      flow.dv(v, u) = f.y();
    }
  }
  return flow;
}

/// 1 where the flow target lands inside [0, W-1] x [0, H-1], else 0.
inline TensorD in_grid_mask(const FlowField& flow) {
  const BevGridSpec& g = flow.grid();
  TensorD mask({static_cast<std::size_t>(g.height_px),
                static_cast<std::size_t>(g.width_px)});
  for (int v = 0; v < g.height_px; ++v) {
    for (int u = 0; u < g.width_px; ++u) {
      const double tu = u + flow.du(v, u);
      const double tv = v + flow.dv(v, u);
      const bool inside =
          tu >= 0.0 && tu <= g.width_px - 1 && tv >= 0.0 && tv <= g.height_px - 1;
      mask(v, u) = inside ? 1.0 : 0.0;
    }
  }
  return mask;
}

/// Weighted least-squares planar pose explaining `flow`.
///
/// Both flow endpoints are lifted to metric vehicle coordinates and the
/// weighted 2D Procrustes problem is solved in closed form: with centered
/// points p, q the optimal angle maximizes a cos(t) + b sin(t), where
/// a = sum w p.q and b = sum w p x q, i.e. t = atan2(b, a). This is the
/// det-corrected SVD solution of the 2x2 cross-covariance written out.
inline Pose2 solve_pose_from_flow(const FlowField& flow,
                                  const TensorD* weights = nullptr) {
  const BevGridSpec& g = flow.grid();
  const std::size_t h = static_cast<std::size_t>(g.height_px);
  const std::size_t w = static_cast<std::size_t>(g.width_px);
  if (weights && weights->shape() != Shape{h, w}) {
    throw ShapeError("weights " + shape_string(weights->shape()) +
                     " do not match flow grid " + shape_string(Shape{h, w}));
  }

  auto weight = [&](std::size_t v, std::size_t u) {
    return weights ? (*weights)(v, u) : 1.0;
  };

  double wsum = 0.0;
  std::size_t active = 0;
  Vector2d psum = Vector2d::Zero();
  Vector2d qsum = Vector2d::Zero();
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      const double wt = weight(v, u);
      if (!(wt >= 0.0) || !std::isfinite(wt)) {
        throw DegenerateInputError("weights must be finite and nonnegative");
      }
      if (wt == 0.0) continue;
      const double du = flow.du(int(v), int(u));
      const double dv = flow.dv(int(v), int(u));
      const Vector4d p = pixel_to_vehicle(double(u), double(v), g);
      const Vector4d q = pixel_to_vehicle(u + du, v + dv, g);
      psum += wt * p.head<2>();
      qsum += wt * q.head<2>();
      wsum += wt;
      ++active;
    }
  }
  if (active < 2) {
    throw DegenerateInputError("need at least 2 pixels with positive weight");
  }
  const Vector2d pbar = psum / wsum;
  const Vector2d qbar = qsum / wsum;

  double a = 0.0;
  double b = 0.0;
  double spread = 0.0;
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      const double wt = weight(v, u);
      if (wt == 0.0) continue;
      const double du = flow.du(int(v), int(u));
      const double dv = flow.dv(int(v), int(u));
      const Vector2d p = pixel_to_vehicle(double(u), double(v), g).head<2>() - pbar;
      const Vector2d q = pixel_to_vehicle(u + du, v + dv, g).head<2>() - qbar;
      a += wt * p.dot(q);
      b += wt * (p.x() * q.y() - p.y() * q.x());
      spread += wt * (p.squaredNorm() + q.squaredNorm());
    }
  }
  if (!(std::hypot(a, b) > 1e-12 * spread)) {
    throw DegenerateGeometryError(
        "cross-covariance admits no unique rotation (points coincide)");
  }
  const double theta = std::atan2(b, a);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double tx = qbar.x() - (c * pbar.x() - s * pbar.y());
  const double ty = qbar.y() - (s * pbar.x() + c * pbar.y());
  return Pose2(theta, tx, ty);
}

/// Endpoint-error summary. Keeps the sorted per-pixel errors so that
/// frac_below can be queried for any threshold.
class FlowStats {
 public:
  FlowStats() = default;
  explicit FlowStats(std::vector<double> errors) : sorted_(std::move(errors)) {
    std::sort(sorted_.begin(), sorted_.end());
    double sum = 0.0;
    for (double e : sorted_) sum += e;
    if (!sorted_.empty()) {
      mean_epe_ = sum / double(sorted_.size());
      max_epe_ = sorted_.back();
    }
  }

  double mean_epe() const noexcept { return mean_epe_; }
  double max_epe() const noexcept { return max_epe_; }
  std::size_t count() const noexcept { return sorted_.size(); }

  /// Fraction of pixels with endpoint error strictly below `tau`.
  double frac_below(double tau) const {
    if (sorted_.empty()) return 0.0;
    const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), tau);
    return double(it - sorted_.begin()) / double(sorted_.size());
  }

 private:
  std::vector<double> sorted_;
  double mean_epe_ = 0.0;
  double max_epe_ = 0.0;
};

struct FlowErrorMap {
  TensorD epe;  // H x W
  FlowStats stats;
};

inline void require_same_grid(const FlowField& a, const FlowField& b) {
  if (a.tensor().shape() != b.tensor().shape()) {
    throw ShapeError("flow grids differ: " + shape_string(a.tensor().shape()) +
                     " vs " + shape_string(b.tensor().shape()));
  }
}

inline FlowErrorMap flow_error_map(const FlowField& pred, const FlowField& gt) {
  require_same_grid(pred, gt);
  const int h = gt.height();
  const int w = gt.width();
  FlowErrorMap out{TensorD({std::size_t(h), std::size_t(w)}), {}};
  std::vector<double> errors;
  errors.reserve(out.epe.size());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double e =
          std::hypot(pred.du(v, u) - gt.du(v, u), pred.dv(v, u) - gt.dv(v, u));
      out.epe(v, u) = e;
      errors.push_back(e);
    }
  }
  out.stats = FlowStats(std::move(errors));
  return out;
}

enum class Reduction { mean, sum };

/// L1 distance between two flow fields over both channels. `mask`, when
/// given, is H x W and excludes pixels where it is zero; the mean then runs
/// over the retained entries.
inline double l1_flow_loss(const FlowField& pred, const FlowField& gt,
                           Reduction reduction = Reduction::mean,
                           const TensorD* mask = nullptr) {
  require_same_grid(pred, gt);
  const int h = gt.height();
  const int w = gt.width();
  if (mask && mask->shape() != Shape{std::size_t(h), std::size_t(w)}) {
    throw ShapeError("mask does not match flow grid");
  }
  double total = 0.0;
  std::size_t n = 0;
  for (int c = 0; c < 2; ++c) {
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        if (mask && (*mask)(v, u) == 0.0) continue;
        total += std::abs(pred.tensor()(c, v, u) - gt.tensor()(c, v, u));
        ++n;
      }
    }
  }
  if (reduction == Reduction::sum) return total;
  return n == 0 ? 0.0 : total / double(n);
}

/// Debug dump, one pixel per line: "u,v,du,dv".
inline std::string flow_to_csv(const FlowField& flow) {
  std::ostringstream os;
  os.precision(17);
  os << "u,v,du,dv\n";
  for (int v = 0; v < flow.height(); ++v) {
    for (int u = 0; u < flow.width(); ++u) {
      os << u << ',' << v << ',' << flow.du(v, u) << ',' << flow.dv(v, u) << '\n';
    }
  }
  return os.str();
}

}  // namespace bevodom
