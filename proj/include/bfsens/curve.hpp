#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bfsens/model.hpp"
#include "bfsens/types.hpp"

namespace bfsens {

enum class PointFlag { Ok, Sparse, Blank, OutOfSupport };

std::string to_string(PointFlag flag);
PointFlag parse_point_flag(const std::string& text);

// Directly computed BF10 at gamma0 that calibrates a whole curve.
struct AnchorResult {
  std::vector<double> gamma0;
  double log_bf10 = 0.0;
  std::string method;
  double est_error = 0.0;
};

// log BF over a 1-D grid or a 2-D lattice (rows of `grid`). Points whose flag
// is not Ok carry NaN in log_bf.
struct SensitivityCurve {
  Matrix grid;
  std::vector<double> log_bf;
  std::vector<PointFlag> flags;
  AnchorResult anchor;
  std::string method;
  Box support;
  std::size_t anchor_node = 0;  // grid row nearest to anchor.gamma0

  std::size_t size() const noexcept { return log_bf.size(); }
  std::size_t dim() const noexcept { return grid.cols(); }
  bool ok(std::size_t i) const noexcept { return flags[i] == PointFlag::Ok; }
};

// 100 equispaced points on [L + eps, U] with eps = 1e-3 (U - L).
Matrix default_grid(const HyperPrior& hyper, std::size_t n = 100);
Matrix linear_grid(double lower, double upper, std::size_t n);
// Row-major lattice: the first coordinate varies slowest.
Matrix lattice(Interval first, std::size_t n_first, Interval second, std::size_t n_second);

std::size_t nearest_node(const Matrix& grid, std::span<const double> point);

}  // namespace bfsens
