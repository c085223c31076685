#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bevodom/errors.hpp"

namespace bevodom {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>{});
}

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

/// Dense row-major N-d tensor. Rank 0 is not representable; every tensor
/// carries at least one dimension.
template <typename Scalar>
class Tensor {
 public:
  using value_type = Scalar;

  Tensor() = default;

  explicit Tensor(Shape shape, Scalar fill = Scalar{})
      : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

  Tensor(Shape shape, std::vector<Scalar> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_numel(shape_)) {
      throw ShapeError("tensor data size " + std::to_string(data_.size()) +
                       " does not match shape " + shape_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<Scalar> values() noexcept { return data_; }
  std::span<const Scalar> values() const noexcept { return data_; }
  Scalar* data() noexcept { return data_.data(); }
  const Scalar* data() const noexcept { return data_.data(); }

  template <typename... Index>
  Scalar& operator()(Index... idx) noexcept {
    return data_[offset(static_cast<std::size_t>(idx)...)];
  }
  template <typename... Index>
  const Scalar& operator()(Index... idx) const noexcept {
    return data_[offset(static_cast<std::size_t>(idx)...)];
  }

  /// Contiguous slab for a fixed leading index (e.g. one channel of C×H×W).
  std::span<Scalar> slab(std::size_t lead) {
    const std::size_t n = data_.size() / shape_.at(0);
    return std::span<Scalar>(data_).subspan(lead * n, n);
  }
  std::span<const Scalar> slab(std::size_t lead) const {
    const std::size_t n = data_.size() / shape_.at(0);
    return std::span<const Scalar>(data_).subspan(lead * n, n);
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  template <typename... Index>
  std::size_t offset(Index... idx) const noexcept {
    const std::size_t indices[] = {idx...};
    std::size_t off = 0;
    for (std::size_t i = 0; i < sizeof...(Index); ++i) {
      off = off * shape_[i] + indices[i];
    }
    return off;
  }

  Shape shape_;
  std::vector<Scalar> data_;
};

using TensorD = Tensor<double>;
using TensorF = Tensor<float>;

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& in) {
  std::vector<To> out(in.size());
  std::transform(in.values().begin(), in.values().end(), out.begin(),
                 [](From v) { return static_cast<To>(v); });
  return Tensor<To>(in.shape(), std::move(out));
}

inline void require_rank(const Shape& shape, std::size_t rank,
                         const char* what) {
  if (shape.size() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got " + shape_string(shape));
  }
}

}  // namespace bevodom
