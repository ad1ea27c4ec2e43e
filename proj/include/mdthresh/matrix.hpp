#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mdthresh {

/// Small dense row-major square matrix.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t dim, double fill = 0.0) : dim_(dim), data_(dim * dim, fill) {}

  static SquareMatrix identity(std::size_t dim) {
    SquareMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }

  double& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * dim_ + col]; }
  double operator()(std::size_t row, std::size_t col) const noexcept { return data_[row * dim_ + col]; }

  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * dim_, dim_};
  }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

}  // namespace mdthresh
