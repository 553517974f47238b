#pragma once

#include <functional>
#include <string>
#include <vector>

namespace bfsens {

struct QuadratureSpec {
  enum class Method { AdaptiveSimpson, GaussKronrod };

  Method method = Method::GaussKronrod;
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  int max_depth = 30;

  void validate() const;
};

std::string to_string(QuadratureSpec::Method method);
QuadratureSpec::Method parse_quadrature_method(const std::string& name);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive integral of f over a finite [a, b] to an absolute error target.
// Throws QuadratureError if max_depth is exhausted before the target is met.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_target, const QuadratureSpec& spec);

// log of \int_lower^upper exp(log_f(x)) dx, with the error reported on the log
// scale (approximately the relative error of the integral). The range is split
// at `breakpoints`; infinite ends are mapped to [0, pi/2) with
// x = b +- tail_scale * tan(phi). The integrand is rescaled by its largest
// value at the breakpoints before exponentiation.
//
// Converged when the log-scale error is below max(abs_tol, rel_tol * |log I|).
QuadResult log_integrate(const std::function<double(double)>& log_f, double lower, double upper,
                         std::vector<double> breakpoints, double tail_scale,
                         const QuadratureSpec& spec);

}  // namespace bfsens
