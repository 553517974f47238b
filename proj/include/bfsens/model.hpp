#pragma once

// Data types, likelihoods and prior densities shared by the sampler, the
// quadrature oracle and the density estimators. Every function here is pure.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bfsens/types.hpp"

namespace bfsens {

// Two-group summary statistics.
struct TTestData {
  int n1 = 0;
  int n2 = 0;
  double mean1 = 0.0;
  double mean2 = 0.0;
  double sd1 = 0.0;
  double sd2 = 0.0;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

struct TTestSufficient {
  double t = 0.0;
  int df = 0;
  double n_eff = 0.0;  // n1*n2/(n1+n2)
};

TTestSufficient ttest_sufficient(const TTestData& data);

/// Log density of the noncentral t distribution.
///
/// Uses the integral representation
///   f(x) = c(x) * H(a),  H(a) = \int_0^inf u^df exp(-(u - a)^2 / 2) du,
///   a = ncp * x / sqrt(x^2 + df),
/// where the integrand of H is log-concave with curvature at most -1, so a
/// mode-centred window of half-width min(10, 40 s) captures it to double
/// precision for any sign of a. Absolute error in the log density is below
/// 1e-10 for |x| <= 50, df <= 500, |ncp| <= 30 (see tests/test_model.cpp).
double noncentral_t_logpdf(double x, double df, double ncp);

// log p(t | delta): noncentral t with df and ncp = delta * sqrt(n_eff).
double ttest_loglik(const TTestSufficient& suff, double delta);

struct MetaData {
  std::vector<double> effects;
  std::vector<double> ses;

  std::size_t size() const noexcept { return effects.size(); }
  void validate() const;
};

// sum_i log N(y_i; mu, se_i^2 + tau^2). tau = 0 is the fixed-effect likelihood.
double meta_loglik(const MetaData& data, double mu, double tau);

// Uniform hyper-prior over a 1-D or 2-D box.
struct HyperPrior {
  Box bounds;

  static HyperPrior uniform(double lower, double upper);
  static HyperPrior uniform(Interval first, Interval second);

  std::size_t dim() const noexcept { return bounds.size(); }
  void validate() const;

  // Open-box membership: the sampler's support.
  bool contains(std::span<const double> gamma) const noexcept { return bounds.contains_open(gamma); }

  // -log(volume) on the closed box, -inf outside.
  double logpdf(std::span<const double> gamma) const noexcept;
};

enum class PriorKind {
  CauchyScale,   // theta ~ Cauchy(center, gamma)
  NormalMeanSd,  // theta ~ N(gamma_1, gamma_2^2)
  NormalSd,      // theta ~ N(center, gamma^2)
};

struct ConditionalPrior {
  PriorKind kind = PriorKind::CauchyScale;
  double center = 0.0;

  static ConditionalPrior cauchy_scale(double center = 0.0) { return {PriorKind::CauchyScale, center}; }
  static ConditionalPrior normal_mean_sd() { return {PriorKind::NormalMeanSd, 0.0}; }
  static ConditionalPrior normal_sd(double center = 0.0) { return {PriorKind::NormalSd, center}; }

  std::size_t gamma_dim() const noexcept { return kind == PriorKind::NormalMeanSd ? 2 : 1; }

  // Location and scale of theta's prior at gamma.
  double location(std::span<const double> gamma) const noexcept;
  double scale(std::span<const double> gamma) const noexcept;

  // Throws DomainError when the scale component of gamma is not > 0.
  double logpdf(double theta, std::span<const double> gamma) const;
};

std::string to_string(PriorKind kind);

inline double conditional_prior_logpdf(const ConditionalPrior& prior, double theta,
                                       std::span<const double> gamma) {
  return prior.logpdf(theta, gamma);
}

// Inverse-Gamma(shape, scale) prior on the heterogeneity tau.
struct HeterogeneityPrior {
  double shape = 1.0;
  double scale = 0.15;

  void validate() const;
  double logpdf(double tau) const noexcept;  // -inf for tau <= 0
  double quantile(double p) const;
  double cdf(double tau) const;
};

double normal_logpdf(double x, double mean, double sd) noexcept;

}  // namespace bfsens
