#pragma once

// Lift-splat geometry: per-pixel depth distributions lift image-plane
// channels into a camera frustum, which is then sum-pooled onto the BEV
// grid. Correlation volumes go through exactly the same path, one
// correlation channel per feature channel.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bevodom/correlation.hpp"
#include "bevodom/geometry.hpp"
#include "bevodom/parallel.hpp"
#include "bevodom/tensor.hpp"

namespace bevodom {

/// D x H x W nonnegative weights over depth bins (bin centers in meters).
struct DepthDistribution {
  TensorD data;
  std::vector<double> bins;
  bool normalized = false;

  DepthDistribution() = default;
  DepthDistribution(TensorD d, std::vector<double> depth_bins,
                    bool is_normalized = false)
      : data(std::move(d)), bins(std::move(depth_bins)), normalized(is_normalized) {
    validate();
  }

  std::size_t depth() const { return data.dim(0); }
  std::size_t height() const { return data.dim(1); }
  std::size_t width() const { return data.dim(2); }

  void validate() const {
    require_rank(data.shape(), 3, "depth distribution");
    if (bins.size() != data.dim(0)) {
      throw ShapeError("depth distribution has " + std::to_string(data.dim(0)) +
                       " bins but " + std::to_string(bins.size()) +
                       " bin centers");
    }
    for (double x : data.values()) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw Error("depth distribution entries must be finite and >= 0");
      }
    }
    if (normalized) {
      const std::size_t plane = height() * width();
      for (std::size_t i = 0; i < plane; ++i) {
        double s = 0.0;
        for (std::size_t d = 0; d < depth(); ++d) s += data.values()[d * plane + i];
        if (std::abs(s - 1.0) > 1e-6) {
          throw Error("depth distribution flagged normalized but a pixel sums to " +
                      std::to_string(s));
        }
      }
    }
  }
};

/// `count` bins starting at `min_m` with spacing (max_m - min_m) / count.
inline std::vector<double> uniform_depth_bins(int count, double min_m,
                                              double max_m) {
  if (count < 1 || !(min_m > 0.0) || !(max_m > min_m)) {
    throw Error("depth bins need count >= 1 and 0 < min < max");
  }
  const double step = (max_m - min_m) / count;
  std::vector<double> bins(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) bins[std::size_t(i)] = min_m + step * i;
  return bins;
}

/// Vehicle-frame coordinates of every (bin, row, col) sample, D x H x W x 3.
struct Frustum {
  TensorD points;

  std::size_t depth() const { return points.dim(0); }
  std::size_t height() const { return points.dim(1); }
  std::size_t width() const { return points.dim(2); }
  Vector3d point(std::size_t d, std::size_t h, std::size_t w) const {
    return {points(d, h, w, 0), points(d, h, w, 1), points(d, h, w, 2)};
  }
};

/// Back-projects pixel centers (col + 0.5, row + 0.5) to each bin depth and
/// maps them into the vehicle frame with the extrinsics.
inline Frustum build_frustum(const CameraModel& cam, const std::vector<double>& bins,
                             std::size_t image_h, std::size_t image_w) {
  if (bins.empty()) throw Error("frustum needs at least one depth bin");
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (!(bins[i] > 0.0) || (i > 0 && !(bins[i] > bins[i - 1]))) {
      throw Error("depth bins must be positive and strictly increasing");
    }
  }
  if (image_h == 0 || image_w == 0) throw ShapeError("empty image size");
  const Matrix3d& k = cam.intrinsics();
  if (std::abs(k.determinant()) < 1e-300) {
    throw InvalidCameraError("intrinsics are singular");
  }
  const Matrix3d k_inv = k.inverse();
  const Matrix3d r = cam.extrinsic_rotation();
  const Vector3d t = cam.extrinsic_translation();

  Frustum f{TensorD({bins.size(), image_h, image_w, 3})};
  for (std::size_t row = 0; row < image_h; ++row) {
    for (std::size_t col = 0; col < image_w; ++col) {
      const Vector3d ray = k_inv * Vector3d(col + 0.5, row + 0.5, 1.0);
      for (std::size_t d = 0; d < bins.size(); ++d) {
        const Vector3d p = r * (bins[d] * ray) + t;
        for (int i = 0; i < 3; ++i) f.points(d, row, col, i) = p[i];
      }
    }
  }
  return f;
}

/// out[c, d, h, w] = context[c, h, w] * depth[d, h, w].
inline TensorD lift(const TensorD& context, const TensorD& depth) {
  require_rank(context.shape(), 3, "lift context");
  require_rank(depth.shape(), 3, "lift depth");
  if (context.dim(1) != depth.dim(1) || context.dim(2) != depth.dim(2)) {
    throw ShapeError("lift: context " + shape_string(context.shape()) +
                     " and depth " + shape_string(depth.shape()) +
                     " differ spatially");
  }
  const std::size_t cn = context.dim(0);
  const std::size_t dn = depth.dim(0);
  const std::size_t plane = context.dim(1) * context.dim(2);
  TensorD out({cn, dn, context.dim(1), context.dim(2)});
  double* o = out.data();
  for (std::size_t c = 0; c < cn; ++c) {
    const double* ctx = context.data() + c * plane;
    for (std::size_t d = 0; d < dn; ++d) {
      const double* dep = depth.data() + d * plane;
      for (std::size_t i = 0; i < plane; ++i) *o++ = ctx[i] * dep[i];
    }
  }
  return out;
}

/// Target BEV cell (row * W + col) of every frustum point, -1 when outside.
struct SplatAssignment {
  std::vector<std::int64_t> cells;
  std::size_t dropped = 0;
};

/// Floor-binned BEV cell of each frustum point; boundary points go to the
/// lower index.
inline SplatAssignment assign_cells(const Frustum& frustum, const BevGridSpec& grid) {
  SplatAssignment a;
  const std::size_t n = frustum.depth() * frustum.height() * frustum.width();
  a.cells.resize(n);
  const double* pts = frustum.points.data();
  for (std::size_t i = 0; i < n; ++i) {
    const Vector4d p(pts[3 * i], pts[3 * i + 1], pts[3 * i + 2], 1.0);
    const Vector2d uv = vehicle_to_pixel(p, grid);
    const double col = std::floor(uv.x());
    const double row = std::floor(uv.y());
    if (col >= 0.0 && col < grid.width_px && row >= 0.0 && row < grid.height_px) {
      a.cells[i] = std::int64_t(row) * grid.width_px + std::int64_t(col);
    } else {
      a.cells[i] = -1;
      ++a.dropped;
    }
  }
  return a;
}

struct SplatResult {
  TensorD bev;             // C x H_bev x W_bev
  std::size_t dropped = 0; // frustum points outside the grid
};

/// Sum-pools each frustum point's channel vector into its BEV cell.
/// Accumulation per cell runs in frustum (d, h, w) order for every thread
/// count; threads split the channels.
inline SplatResult splat(const TensorD& lifted, const Frustum& frustum,
                         const BevGridSpec& grid, const ExecutionOptions& exec = {}) {
  require_rank(lifted.shape(), 4, "splat input");
  if (lifted.dim(1) != frustum.depth() || lifted.dim(2) != frustum.height() ||
      lifted.dim(3) != frustum.width()) {
    throw ShapeError("splat: lifted tensor " + shape_string(lifted.shape()) +
                     " does not match frustum " + shape_string(frustum.points.shape()));
  }
  grid.validate();
  const SplatAssignment assign = assign_cells(frustum, grid);
  const std::size_t cn = lifted.dim(0);
  const std::size_t n = assign.cells.size();
  SplatResult out{TensorD({cn, std::size_t(grid.height_px), std::size_t(grid.width_px)}),
                  assign.dropped};
  parallel_for(cn, exec, [&](std::size_t c) {
    const double* src = lifted.data() + c * n;
    double* dst = out.bev.slab(c).data();
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t cell = assign.cells[i];
      if (cell >= 0) dst[cell] += src[i];
    }
  });
  return out;
}

/// Projects any C x H x W channel stack to the BEV grid: splat(lift(...)).
inline SplatResult project_channels(const TensorD& channels,
                                    const DepthDistribution& depth,
                                    const CameraModel& cam, const BevGridSpec& grid,
                                    const ExecutionOptions& exec = {}) {
  require_rank(channels.shape(), 3, "projected channels");
  const Frustum frustum = build_frustum(cam, depth.bins, depth.height(), depth.width());
  return splat(lift(channels, depth.data), frustum, grid, exec);
}

/// Correlation volume to BEV through the same lift-splat path, reusing the
/// depth distribution of the features.
inline SplatResult project_volume(const CorrelationVolume& vol,
                                  const DepthDistribution& depth,
                                  const CameraModel& cam, const BevGridSpec& grid,
                                  const ExecutionOptions& exec = {}) {
  return project_channels(vol.data, depth, cam, grid, exec);
}

}  // namespace bevodom
