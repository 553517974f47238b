#include "bfsens/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bfsens/error.hpp"

namespace bfsens {

namespace {

struct SimpsonState {
  const std::function<double(double)>* f;
  double error = 0.0;
  bool converged = true;
};

double simpson_step(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = (*st.f)(lm);
  const double frm = (*st.f)(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || m <= a || b <= m) {
    st.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth <= 0) {
    st.converged = false;
    st.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

QuadResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                            double abs_target, int max_depth) {
  // Four initial panels so that a narrow feature cannot hide between the
  // first three nodes.
  constexpr int kPanels = 4;
  SimpsonState st{&f};
  double total = 0.0;
  const double h = (b - a) / kPanels;
  for (int p = 0; p < kPanels; ++p) {
    const double lo = a + p * h;
    const double hi = p + 1 == kPanels ? b : lo + h;
    const double fa = f(lo);
    const double fb = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_step(st, lo, hi, fa, fm, fb, whole, abs_target / kPanels, max_depth);
  }
  if (!st.converged && st.error > abs_target)
    throw QuadratureError("adaptive Simpson did not converge", total, st.error);
  return {total, st.error};
}

QuadResult gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                         double abs_target, int max_depth) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  // Boost compares panel error estimates taken on the reference interval
  // against scaled estimates, so narrow ranges never terminate. Integrating
  // over [0, 1] keeps the two on the same scale.
  const double width = b - a;
  const std::function<double(double)> g = [&f, a, width](double t) { return width * f(a + width * t); };
  double coarse_err = 0.0;
  const double coarse = GK::integrate(g, 0.0, 1.0, 0, 0.0, &coarse_err);
  double rel = abs_target / std::max(std::abs(coarse), 1e-300);
  double error = 0.0;
  double value = GK::integrate(g, 0.0, 1.0, static_cast<unsigned>(max_depth), rel, &error);
  // The coarse pass can overstate the magnitude; tighten and retry.
  for (int attempt = 0; attempt < 4 && error > abs_target && error > 1e-15 * std::abs(value); ++attempt) {
    rel *= 0.5 * abs_target / error;
    value = GK::integrate(g, 0.0, 1.0, static_cast<unsigned>(max_depth), rel, &error);
  }
  if (error > abs_target && error > 1e-15 * std::abs(value))
    throw QuadratureError("Gauss-Kronrod did not converge", value, error);
  return {value, error};
}

struct Segment {
  std::function<double(double)> integrand;
  double a;
  double b;
};

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw ValidationError("quadrature tolerances must be positive");
  if (max_depth < 10) throw ValidationError("quadrature max_depth must be at least 10");
}

std::string to_string(QuadratureSpec::Method method) {
  return method == QuadratureSpec::Method::AdaptiveSimpson ? "adaptive-simpson" : "gauss-kronrod";
}

QuadratureSpec::Method parse_quadrature_method(const std::string& name) {
  if (name == "adaptive-simpson") return QuadratureSpec::Method::AdaptiveSimpson;
  if (name == "gauss-kronrod") return QuadratureSpec::Method::GaussKronrod;
  throw ValidationError("unknown quadrature method '" + name + "'");
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_target, const QuadratureSpec& spec) {
  if (!(b > a)) return {0.0, 0.0};
  if (spec.method == QuadratureSpec::Method::AdaptiveSimpson)
    return adaptive_simpson(f, a, b, abs_target, spec.max_depth);
  return gauss_kronrod(f, a, b, abs_target, spec.max_depth);
}

QuadResult log_integrate(const std::function<double(double)>& log_f, double lower, double upper,
                         std::vector<double> breakpoints, double tail_scale,
                         const QuadratureSpec& spec) {
  spec.validate();
  std::erase_if(breakpoints, [&](double x) { return !(x > lower && x < upper) || !std::isfinite(x); });
  if (std::isfinite(lower)) breakpoints.push_back(lower);
  if (std::isfinite(upper)) breakpoints.push_back(upper);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  if (breakpoints.empty()) breakpoints.push_back(0.0);

  double offset = -INFINITY;
  for (double x : breakpoints) offset = std::max(offset, log_f(x));
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    offset = std::max(offset, log_f(0.5 * (breakpoints[i] + breakpoints[i + 1])));
  if (!std::isfinite(offset))
    throw QuadratureError("integrand vanishes at every breakpoint", -INFINITY, INFINITY);

  auto f = [&log_f, offset](double x) {
    const double v = log_f(x) - offset;
    return v == -INFINITY ? 0.0 : std::exp(v);
  };

  constexpr double kHalfPi = 0.5 * std::numbers::pi;
  std::vector<Segment> segments;
  if (!std::isfinite(lower)) {
    const double b0 = breakpoints.front();
    segments.push_back({[f, b0, tail_scale](double phi) {
                          const double c = std::cos(phi);
                          if (c <= 0.0) return 0.0;
                          return f(b0 - tail_scale * std::tan(phi)) * tail_scale / (c * c);
                        },
                        0.0, kHalfPi});
  }
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    segments.push_back({f, breakpoints[i], breakpoints[i + 1]});
  if (!std::isfinite(upper)) {
    const double b1 = breakpoints.back();
    segments.push_back({[f, b1, tail_scale](double phi) {
                          const double c = std::cos(phi);
                          if (c <= 0.0) return 0.0;
                          return f(b1 + tail_scale * std::tan(phi)) * tail_scale / (c * c);
                        },
                        0.0, kHalfPi});
  }

  // Pilot pass for the magnitude of the integral.
  double pilot = 0.0;
  for (const auto& seg : segments)
    pilot += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(seg.integrand, seg.a, seg.b, 0);
  if (!(pilot > 0.0)) pilot = 1e-300;
  const double log_tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(offset + std::log(pilot)));
  const double target = log_tol * pilot / static_cast<double>(segments.size());

  double total = 0.0;
  double error = 0.0;
  bool failed = false;
  for (const auto& seg : segments) {
    try {
      const QuadResult r = integrate(seg.integrand, seg.a, seg.b, target, spec);
      total += r.value;
      error += r.error;
    } catch (const QuadratureError& e) {
      failed = true;
      total += e.best_estimate();
      error += e.error_bound();
    }
  }
  if (!(total > 0.0))
    throw QuadratureError("integral underflowed", -INFINITY, INFINITY);
  const QuadResult out{offset + std::log(total), error / total};
  if (failed && out.error > log_tol)
    throw QuadratureError(to_string(spec.method) + " did not reach the log-scale tolerance",
                          out.value, out.error);
  return out;
}

}  // namespace bfsens
