#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace bfsens {

struct Interval {
  double lower = 0.0;
  double upper = 1.0;

  double width() const noexcept { return upper - lower; }
  bool contains_open(double x) const noexcept { return x > lower && x < upper; }
  bool contains_closed(double x) const noexcept { return x >= lower && x <= upper; }
};

// Axis-aligned box, one interval per dimension.
struct Box {
  std::vector<Interval> dims;

  Box() = default;
  explicit Box(std::vector<Interval> d) : dims(std::move(d)) {}

  std::size_t size() const noexcept { return dims.size(); }
  const Interval& operator[](std::size_t i) const { return dims[i]; }

  double volume() const noexcept {
    double v = 1.0;
    for (const auto& d : dims) v *= d.width();
    return v;
  }

  bool contains_open(std::span<const double> x) const noexcept {
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (!dims[i].contains_open(x[i])) return false;
    return true;
  }

  bool contains_closed(std::span<const double> x) const noexcept {
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (!dims[i].contains_closed(x[i])) return false;
    return true;
  }
};

// Dense row-major matrix of doubles; rows are draws, columns are parameters.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
    return out;
  }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  const std::vector<double>& data() const noexcept { return data_; }

  static Matrix from_column(const std::vector<double>& col) {
    Matrix m(col.size(), 1);
    m.data_ = col;
    return m;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double log_sum_exp(std::span<const double> x) {
  double m = -INFINITY;
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

inline double log_add_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace bfsens
