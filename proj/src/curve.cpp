#include "bfsens/curve.hpp"

#include <limits>

#include "bfsens/error.hpp"

namespace bfsens {

std::string to_string(PointFlag flag) {
  switch (flag) {
    case PointFlag::Ok:
      return "ok";
    case PointFlag::Sparse:
      return "sparse";
    case PointFlag::Blank:
      return "blank";
    case PointFlag::OutOfSupport:
      return "out-of-support";
  }
  return "unknown";
}

PointFlag parse_point_flag(const std::string& text) {
  if (text == "ok") return PointFlag::Ok;
  if (text == "sparse") return PointFlag::Sparse;
  if (text == "blank") return PointFlag::Blank;
  if (text == "out-of-support") return PointFlag::OutOfSupport;
  throw ValidationError("unknown point flag '" + text + "'");
}

Matrix linear_grid(double lower, double upper, std::size_t n) {
  Matrix g(n, 1);
  if (n == 1) {
    g(0, 0) = lower;
    return g;
  }
  for (std::size_t i = 0; i < n; ++i)
    g(i, 0) = i + 1 == n ? upper : lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

Matrix default_grid(const HyperPrior& hyper, std::size_t n) {
  if (hyper.dim() != 1) throw ValidationError("default_grid is one-dimensional");
  const Interval b = hyper.bounds[0];
  return linear_grid(b.lower + 1e-3 * b.width(), b.upper, n);
}

Matrix lattice(Interval first, std::size_t n_first, Interval second, std::size_t n_second) {
  const Matrix a = linear_grid(first.lower, first.upper, n_first);
  const Matrix b = linear_grid(second.lower, second.upper, n_second);
  Matrix out(n_first * n_second, 2);
  for (std::size_t i = 0; i < n_first; ++i)
    for (std::size_t j = 0; j < n_second; ++j) {
      out(i * n_second + j, 0) = a(i, 0);
      out(i * n_second + j, 1) = b(j, 0);
    }
  return out;
}

std::size_t nearest_node(const Matrix& grid, std::span<const double> point) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    double d = 0.0;
    for (std::size_t k = 0; k < grid.cols(); ++k) {
      const double diff = grid(i, k) - point[k];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace bfsens
