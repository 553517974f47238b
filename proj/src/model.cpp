#include "bfsens/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bfsens/error.hpp"

namespace bfsens {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

// log \int_0^inf u^nu exp(-(u - a)^2 / 2) du.
double log_hermite_integral(double nu, double a) {
  // Mode of g(u) = nu log u - (u - a)^2 / 2, in the cancellation-free form
  // for either sign of a.
  const double root = std::hypot(a, 2.0 * std::sqrt(nu));
  const double mode = a > 0.0 ? 0.5 * (a + root) : 2.0 * nu / (root - a);
  const double g_mode = nu * std::log(mode) - 0.5 * (mode - a) * (mode - a);
  const double s = 1.0 / std::sqrt(nu / (mode * mode) + 1.0);

  auto drop = [&](double u) -> double {
    if (u <= 0.0) return -INFINITY;
    return nu * std::log(u / mode) - 0.5 * (u - mode) * (u + mode - 2.0 * a);
  };

  // g is concave, so the mass beyond a point where g has dropped by 40 is
  // below exp(-40) / |g'| relative to the peak.
  constexpr double kDrop = -40.0;
  double right = 8.0 * s;
  while (drop(mode + right) > kDrop) right *= 1.5;
  double left = std::min(8.0 * s, mode);
  while (left < mode && drop(mode - left) > kDrop) left = std::min(left * 1.5, mode);

  auto integrand = [&](double u) { return std::exp(drop(u)); };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, mode - left, mode + right, 12, 1e-14, &error);
  return g_mode + std::log(value);
}

}  // namespace

void TTestData::validate() const {
  require(n1 >= 2, "n1 must be at least 2 (got " + std::to_string(n1) + ")");
  require(n2 >= 2, "n2 must be at least 2 (got " + std::to_string(n2) + ")");
  require(std::isfinite(mean1), "mean1 must be finite");
  require(std::isfinite(mean2), "mean2 must be finite");
  require(std::isfinite(sd1) && sd1 > 0.0, "sd1 must be positive");
  require(std::isfinite(sd2) && sd2 > 0.0, "sd2 must be positive");
}

TTestSufficient ttest_sufficient(const TTestData& data) {
  data.validate();
  const double n1 = data.n1;
  const double n2 = data.n2;
  const int df = data.n1 + data.n2 - 2;
  const double pooled_var =
      ((n1 - 1.0) * data.sd1 * data.sd1 + (n2 - 1.0) * data.sd2 * data.sd2) / df;
  const double se = std::sqrt(pooled_var * (1.0 / n1 + 1.0 / n2));
  return {(data.mean1 - data.mean2) / se, df, n1 * n2 / (n1 + n2)};
}

double noncentral_t_logpdf(double x, double df, double ncp) {
  if (!std::isfinite(x) || !std::isfinite(ncp) || !(df > 0.0)) return -INFINITY;
  const double s2 = x * x + df;
  const double a = ncp * x / std::sqrt(s2);
  if (!std::isfinite(a * a)) return -INFINITY;
  const double log_c = 0.5 * df * std::log(df) - df * ncp * ncp / (2.0 * s2) -
                       0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * df) -
                       0.5 * (df - 1.0) * std::numbers::ln2 - 0.5 * (df + 1.0) * std::log(s2);
  return log_c + log_hermite_integral(df, a);
}

double ttest_loglik(const TTestSufficient& suff, double delta) {
  return noncentral_t_logpdf(suff.t, suff.df, delta * std::sqrt(suff.n_eff));
}

void MetaData::validate() const {
  require(!effects.empty(), "meta-analysis needs at least one study");
  require(effects.size() == ses.size(), "effects and ses must have equal length");
  for (std::size_t i = 0; i < effects.size(); ++i) {
    require(std::isfinite(effects[i]), "effect in row " + std::to_string(i + 1) + " is not finite");
    require(std::isfinite(ses[i]) && ses[i] > 0.0,
            "se in row " + std::to_string(i + 1) + " must be positive");
  }
}

double meta_loglik(const MetaData& data, double mu, double tau) {
  const double tau2 = tau * tau;
  double sum = 0.0;
  for (std::size_t i = 0; i < data.effects.size(); ++i) {
    const double v = data.ses[i] * data.ses[i] + tau2;
    const double r = data.effects[i] - mu;
    sum += -kLogSqrt2Pi - 0.5 * std::log(v) - 0.5 * r * r / v;
  }
  return sum;
}

HyperPrior HyperPrior::uniform(double lower, double upper) {
  HyperPrior h{Box({Interval{lower, upper}})};
  h.validate();
  return h;
}

HyperPrior HyperPrior::uniform(Interval first, Interval second) {
  HyperPrior h{Box({first, second})};
  h.validate();
  return h;
}

void HyperPrior::validate() const {
  require(dim() == 1 || dim() == 2, "hyper-prior must be 1- or 2-dimensional");
  for (const auto& d : bounds.dims)
    require(std::isfinite(d.lower) && std::isfinite(d.upper) && d.lower < d.upper,
            "hyper-prior bounds must satisfy lower < upper");
}

double HyperPrior::logpdf(std::span<const double> gamma) const noexcept {
  return bounds.contains_closed(gamma) ? -std::log(bounds.volume()) : -INFINITY;
}

double normal_logpdf(double x, double mean, double sd) noexcept {
  const double z = (x - mean) / sd;
  return -kLogSqrt2Pi - std::log(sd) - 0.5 * z * z;
}

double ConditionalPrior::location(std::span<const double> gamma) const noexcept {
  return kind == PriorKind::NormalMeanSd ? gamma[0] : center;
}

double ConditionalPrior::scale(std::span<const double> gamma) const noexcept {
  return kind == PriorKind::NormalMeanSd ? gamma[1] : gamma[0];
}

double ConditionalPrior::logpdf(double theta, std::span<const double> gamma) const {
  const double s = scale(gamma);
  if (!(s > 0.0) || !std::isfinite(s))
    throw DomainError(to_string(kind) + " prior needs a positive finite scale");
  switch (kind) {
    case PriorKind::CauchyScale: {
      const double d = theta - center;
      return std::log(s) - std::log(std::numbers::pi) - std::log(d * d + s * s);
    }
    case PriorKind::NormalMeanSd:
      return normal_logpdf(theta, gamma[0], s);
    case PriorKind::NormalSd:
      return normal_logpdf(theta, center, s);
  }
  return -INFINITY;
}

std::string to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::CauchyScale:
      return "cauchy-scale";
    case PriorKind::NormalMeanSd:
      return "normal-meansd";
    case PriorKind::NormalSd:
      return "normal-sd";
  }
  return "unknown";
}

void HeterogeneityPrior::validate() const {
  require(std::isfinite(shape) && shape > 0.0, "heterogeneity prior shape must be positive");
  require(std::isfinite(scale) && scale > 0.0, "heterogeneity prior scale must be positive");
}

double HeterogeneityPrior::logpdf(double tau) const noexcept {
  if (!(tau > 0.0)) return -INFINITY;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(tau) - scale / tau;
}

double HeterogeneityPrior::quantile(double p) const {
  return boost::math::quantile(boost::math::inverse_gamma_distribution<double>(shape, scale), p);
}

double HeterogeneityPrior::cdf(double tau) const {
  if (!(tau > 0.0)) return 0.0;
  return boost::math::cdf(boost::math::inverse_gamma_distribution<double>(shape, scale), tau);
}

}  // namespace bfsens
