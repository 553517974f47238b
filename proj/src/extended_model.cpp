#include "bfsens/extended_model.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/tools/roots.hpp>

#include "bfsens/error.hpp"

namespace bfsens {

Box SensitivityModel::theta_domain() const {
  return Box(std::vector<Interval>(theta_dim(), Interval{-INFINITY, INFINITY}));
}

std::optional<double> SensitivityModel::log_full_conditional(std::span<const double>,
                                                             std::span<const double>) const {
  return std::nullopt;
}

double normal_sd_log_full_conditional(double s, double theta_minus_center, Interval support) {
  if (!support.contains_closed(s) || !(s > 0.0)) return -INFINITY;
  const double a = 0.5 * theta_minus_center * theta_minus_center;
  if (a == 0.0) {
    if (support.lower <= 0.0) return -INFINITY;
    return -std::log(s) - std::log(std::log(support.upper / support.lower));
  }
  const double upper_term = boost::math::expint(1, a / (support.upper * support.upper));
  const double lower_term =
      support.lower > 0.0 ? boost::math::expint(1, a / (support.lower * support.lower)) : 0.0;
  const double norm = 0.5 * (upper_term - lower_term);
  return -std::log(s) - a / (s * s) - std::log(norm);
}

double cauchy_scale_log_full_conditional(double r, double delta, Interval support) {
  if (!support.contains_closed(r) || !(r > 0.0)) return -INFINITY;
  const double d2 = delta * delta;
  if (d2 == 0.0) {
    if (support.lower <= 0.0) return -INFINITY;
    return -std::log(r) - std::log(std::log(support.upper / support.lower));
  }
  const double u2 = support.upper * support.upper / d2;
  const double l2 = support.lower * support.lower / d2;
  const double norm = 0.5 * (std::log1p(u2) - std::log1p(l2));
  return std::log(r) - std::log(d2 + r * r) - std::log(norm);
}

// --- CauchyTTestModel ------------------------------------------------------

CauchyTTestModel::CauchyTTestModel(TTestSufficient suff, HyperPrior hyper)
    : suff_(suff), hyper_(std::move(hyper)) {
  if (hyper_.dim() != 1) throw ValidationError("Cauchy t-test model needs a 1-D hyper-prior");
}

double CauchyTTestModel::log_likelihood(std::span<const double> theta) const {
  return ttest_loglik(suff_, theta[0]);
}

double CauchyTTestModel::log_conditional_prior(std::span<const double> theta,
                                               std::span<const double> gamma) const {
  return prior_.logpdf(theta[0], gamma);
}

std::optional<double> CauchyTTestModel::log_full_conditional(std::span<const double> gamma,
                                                             std::span<const double> theta) const {
  return cauchy_scale_log_full_conditional(gamma[0], theta[0] - prior_.center, hyper_.bounds[0]);
}

std::vector<double> CauchyTTestModel::initial_theta() const {
  return {suff_.t / std::sqrt(suff_.n_eff)};
}

std::vector<double> CauchyTTestModel::theta_scale() const {
  return {1.0 / std::sqrt(suff_.n_eff)};
}

// --- InformedTTestModel ----------------------------------------------------

InformedTTestModel::InformedTTestModel(TTestSufficient suff, HyperPrior hyper)
    : suff_(suff), hyper_(std::move(hyper)) {
  if (hyper_.dim() != 2) throw ValidationError("informed t-test model needs a 2-D hyper-prior");
}

double InformedTTestModel::log_likelihood(std::span<const double> theta) const {
  return ttest_loglik(suff_, theta[0]);
}

double InformedTTestModel::log_conditional_prior(std::span<const double> theta,
                                                 std::span<const double> gamma) const {
  return prior_.logpdf(theta[0], gamma);
}

std::vector<double> InformedTTestModel::initial_theta() const {
  return {suff_.t / std::sqrt(suff_.n_eff)};
}

std::vector<double> InformedTTestModel::theta_scale() const {
  return {1.0 / std::sqrt(suff_.n_eff)};
}

// --- MetaAlternativeModel --------------------------------------------------

MetaAlternativeModel::MetaAlternativeModel(MetaData data, HeterogeneityPrior tau_prior,
                                           HyperPrior hyper, MetaStructure structure)
    : data_(std::move(data)), tau_prior_(tau_prior), hyper_(std::move(hyper)), structure_(structure) {
  data_.validate();
  tau_prior_.validate();
  if (hyper_.dim() != 1) throw ValidationError("meta-analysis model needs a 1-D hyper-prior");
}

std::string MetaAlternativeModel::name() const {
  return structure_ == MetaStructure::FixedEffect ? "meta-fe-alt" : "meta-re-alt";
}

std::vector<std::string> MetaAlternativeModel::theta_names() const {
  if (structure_ == MetaStructure::FixedEffect) return {"mu"};
  return {"mu", "tau"};
}

Box MetaAlternativeModel::theta_domain() const {
  if (structure_ == MetaStructure::FixedEffect) return Box({Interval{-INFINITY, INFINITY}});
  return Box({Interval{-INFINITY, INFINITY}, Interval{0.0, INFINITY}});
}

double MetaAlternativeModel::log_likelihood(std::span<const double> theta) const {
  const double tau = structure_ == MetaStructure::FixedEffect ? 0.0 : theta[1];
  return meta_loglik(data_, theta[0], tau);
}

double MetaAlternativeModel::log_conditional_prior(std::span<const double> theta,
                                                   std::span<const double> gamma) const {
  double lp = prior_.logpdf(theta[0], gamma);
  if (structure_ == MetaStructure::RandomEffects) lp += tau_prior_.logpdf(theta[1]);
  return lp;
}

std::optional<double> MetaAlternativeModel::log_full_conditional(
    std::span<const double> gamma, std::span<const double> theta) const {
  return normal_sd_log_full_conditional(gamma[0], theta[0] - prior_.center, hyper_.bounds[0]);
}

std::vector<double> MetaAlternativeModel::initial_theta() const {
  double wsum = 0.0;
  double ysum = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double w = 1.0 / (data_.ses[i] * data_.ses[i]);
    wsum += w;
    ysum += w * data_.effects[i];
  }
  if (structure_ == MetaStructure::FixedEffect) return {ysum / wsum};
  return {ysum / wsum, tau_prior_.quantile(0.5)};
}

std::vector<double> MetaAlternativeModel::theta_scale() const {
  double wsum = 0.0;
  for (double se : data_.ses) wsum += 1.0 / (se * se);
  const double mu_scale = 1.0 / std::sqrt(wsum);
  if (structure_ == MetaStructure::FixedEffect) return {mu_scale};
  return {mu_scale, std::max(mu_scale, 0.5 * tau_prior_.quantile(0.5))};
}

// --- ConjugateNormalModel --------------------------------------------------

ConjugateNormalModel::ConjugateNormalModel(double ybar, double sigma, int n, HyperPrior hyper)
    : ybar_(ybar), se_(sigma / std::sqrt(static_cast<double>(n))), hyper_(std::move(hyper)) {
  if (!(sigma > 0.0) || n < 1) throw ValidationError("conjugate model needs sigma > 0 and n >= 1");
  if (hyper_.dim() != 1) throw ValidationError("conjugate model needs a 1-D hyper-prior");
  const Interval b = hyper_.bounds[0];
  const double ref = log_marginal(std::max(b.lower, 1e-300));
  auto f = [&](double g) { return std::exp(log_marginal(g) - ref); };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, b.lower, b.upper, 20, 1e-14);
  log_norm_ = ref + std::log(integral) - std::log(b.width());
}

double ConjugateNormalModel::log_likelihood(std::span<const double> theta) const {
  return normal_logpdf(ybar_, theta[0], se_);
}

double ConjugateNormalModel::log_conditional_prior(std::span<const double> theta,
                                                   std::span<const double> gamma) const {
  return ConditionalPrior::normal_sd().logpdf(theta[0], gamma);
}

std::optional<double> ConjugateNormalModel::log_full_conditional(
    std::span<const double> gamma, std::span<const double> theta) const {
  return normal_sd_log_full_conditional(gamma[0], theta[0], hyper_.bounds[0]);
}

std::vector<double> ConjugateNormalModel::initial_theta() const { return {ybar_}; }

std::vector<double> ConjugateNormalModel::theta_scale() const { return {se_}; }

double ConjugateNormalModel::log_marginal(double gamma) const {
  return normal_logpdf(ybar_, 0.0, std::sqrt(gamma * gamma + se_ * se_));
}

double ConjugateNormalModel::log_null_marginal() const { return normal_logpdf(ybar_, 0.0, se_); }

double ConjugateNormalModel::log_gamma_posterior(double gamma) const {
  if (!hyper_.bounds[0].contains_closed(gamma)) return -INFINITY;
  const double g[1] = {gamma};
  return log_marginal(gamma) + hyper_.logpdf(g) - log_norm_;
}

double ConjugateNormalModel::gamma_posterior_cdf(double gamma) const {
  const Interval b = hyper_.bounds[0];
  if (gamma <= b.lower) return 0.0;
  if (gamma >= b.upper) return 1.0;
  auto f = [&](double g) { return std::exp(log_gamma_posterior(g)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, b.lower, gamma, 20, 1e-13);
}

double ConjugateNormalModel::gamma_posterior_median() const {
  const Interval b = hyper_.bounds[0];
  auto f = [&](double g) { return gamma_posterior_cdf(g) - 0.5; };
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(f, b.lower, b.upper, -0.5, 0.5, tol, iters);
  return 0.5 * (lo + hi);
}

}  // namespace bfsens
