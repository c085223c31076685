#pragma once

// Local correlation volumes between consecutive feature maps.
//
// For radius R the volume has (2R+1)^2 channels; channel
// idx(dx, dy) = (dy + R) * (2R + 1) + (dx + R) holds, at pixel (row, col),
//   sum_c a[c, row, col] * b[c, row + dy, col + dx]
// with dx along columns and dy along rows. Targets outside the map read 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bevodom/parallel.hpp"
#include "bevodom/tensor.hpp"

namespace bevodom {

enum class Branch { pv, bev };

/// C x H x W features for one frame of one branch.
struct FeatureMap {
  TensorD data;
  std::string frame;
  Branch branch = Branch::bev;

  FeatureMap() = default;
  explicit FeatureMap(TensorD d, std::string frame_tag = {},
                      Branch b = Branch::bev)
      : data(std::move(d)), frame(std::move(frame_tag)), branch(b) {
    validate();
  }

  std::size_t channels() const { return data.dim(0); }
  std::size_t height() const { return data.dim(1); }
  std::size_t width() const { return data.dim(2); }

  void validate() const {
    require_rank(data.shape(), 3, "feature map");
    if (data.empty()) throw ShapeError("feature map must be non-empty");
    for (double x : data.values()) {
      if (!std::isfinite(x)) throw Error("feature map has non-finite entries");
    }
  }
};

inline constexpr int window_size(int radius) { return 2 * radius + 1; }
inline constexpr int channel_count(int radius) {
  return window_size(radius) * window_size(radius);
}

inline constexpr int displacement_index(int dx, int dy, int radius) {
  return (dy + radius) * window_size(radius) + (dx + radius);
}

/// Inverse of displacement_index: (dx, dy) of a channel.
inline constexpr std::pair<int, int> index_displacement(int idx, int radius) {
  return {idx % window_size(radius) - radius, idx / window_size(radius) - radius};
}

struct CorrelationVolume {
  TensorD data;  // (2R+1)^2 x H x W
  int radius = 0;

  std::size_t height() const { return data.dim(1); }
  std::size_t width() const { return data.dim(2); }
};

struct CorrelationOptions {
  /// Divide by the channel count C. Off: the plain inner product.
  bool normalize = false;
  ExecutionOptions exec;
};

inline CorrelationVolume local_correlation(const FeatureMap& a,
                                           const FeatureMap& b, int radius,
                                           const CorrelationOptions& opts = {}) {
  if (a.data.shape() != b.data.shape()) {
    throw ShapeError("correlation inputs differ: " + shape_string(a.data.shape()) +
                     " vs " + shape_string(b.data.shape()));
  }
  if (radius < 0) throw Error("correlation radius must be >= 0");

  const int c_n = int(a.channels());
  const int h = int(a.height());
  const int w = int(a.width());
  const int k = channel_count(radius);
  CorrelationVolume vol{TensorD({std::size_t(k), std::size_t(h), std::size_t(w)}),
                        radius};
  const double scale = opts.normalize ? 1.0 / double(c_n) : 1.0;

  parallel_for(std::size_t(k), opts.exec, [&](std::size_t idx) {
    const auto [dx, dy] = index_displacement(int(idx), radius);
    auto out = vol.data.slab(idx);
    const int row_lo = std::max(0, -dy);
    const int row_hi = std::min(h, h - dy);
    const int col_lo = std::max(0, -dx);
    const int col_hi = std::min(w, w - dx);
    for (int c = 0; c < c_n; ++c) {
      const auto fa = a.data.slab(std::size_t(c));
      const auto fb = b.data.slab(std::size_t(c));
      for (int row = row_lo; row < row_hi; ++row) {
        const double* pa = fa.data() + std::size_t(row) * w;
        const double* pb = fb.data() + std::size_t(row + dy) * w + dx;
        double* po = out.data() + std::size_t(row) * w;
        for (int col = col_lo; col < col_hi; ++col) po[col] += pa[col] * pb[col];
      }
    }
    if (scale != 1.0) {
      for (double& x : out) x *= scale;
    }
  });
  return vol;
}

/// Channel-wise concatenation of volumes sharing H x W; radii are kept in order.
struct VolumeStack {
  TensorD data;
  std::vector<int> radii;
};

inline VolumeStack concat_volumes(const CorrelationVolume& a,
                                  const CorrelationVolume& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError("cannot concatenate volumes of different spatial size");
  }
  const std::size_t ka = a.data.dim(0);
  const std::size_t kb = b.data.dim(0);
  std::vector<double> values;
  values.reserve(a.data.size() + b.data.size());
  values.insert(values.end(), a.data.values().begin(), a.data.values().end());
  values.insert(values.end(), b.data.values().begin(), b.data.values().end());
  return {TensorD({ka + kb, a.height(), a.width()}, std::move(values)),
          {a.radius, b.radius}};
}

/// Per-pixel (dx, dy) of the strongest channel as a 2 x H x W tensor.
/// Ties go to the smallest channel index.
inline Tensor<std::int32_t> peak_displacement(const CorrelationVolume& vol) {
  const std::size_t k = vol.data.dim(0);
  const std::size_t h = vol.height();
  const std::size_t w = vol.width();
  Tensor<std::int32_t> out({2, h, w});
  for (std::size_t row = 0; row < h; ++row) {
    for (std::size_t col = 0; col < w; ++col) {
      std::size_t best = 0;
      double best_val = vol.data(0, row, col);
      for (std::size_t idx = 1; idx < k; ++idx) {
        const double val = vol.data(idx, row, col);
        if (val > best_val) {
          best_val = val;
          best = idx;
        }
      }
      const auto [dx, dy] = index_displacement(int(best), vol.radius);
      out(0, row, col) = dx;
      out(1, row, col) = dy;
    }
  }
  return out;
}

}  // namespace bevodom
