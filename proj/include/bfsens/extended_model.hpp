#pragma once

// Extended models H_gamma: a likelihood over theta, a conditional prior
// p(theta | gamma) and a hyper-prior pi(gamma). gamma enters only through the
// conditional prior, which is what lets the density ratio estimators skip the
// likelihood entirely.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfsens/model.hpp"

namespace bfsens {

class SensitivityModel {
 public:
  virtual ~SensitivityModel() = default;

  virtual std::string name() const = 0;
  virtual const HyperPrior& hyper_prior() const = 0;
  std::size_t gamma_dim() const { return hyper_prior().dim(); }
  virtual std::size_t theta_dim() const = 0;

  virtual std::vector<std::string> gamma_names() const = 0;
  virtual std::vector<std::string> theta_names() const = 0;

  // Per-coordinate domain of theta (unbounded by default). Proposals on or
  // outside a finite bound are rejected.
  virtual Box theta_domain() const;

  virtual double log_likelihood(std::span<const double> theta) const = 0;
  virtual double log_conditional_prior(std::span<const double> theta,
                                       std::span<const double> gamma) const = 0;

  double log_hyper_prior(std::span<const double> gamma) const { return hyper_prior().logpdf(gamma); }

  // Normalized log p(gamma | theta, y) of the extended model, when it has a
  // closed form. Used as the optimal IWMDE weight (which makes it the CMDE).
  virtual std::optional<double> log_full_conditional(std::span<const double> gamma,
                                                     std::span<const double> theta) const;

  // Chain initialisation centre and a proposal-scale hint for theta.
  virtual std::vector<double> initial_theta() const = 0;
  virtual std::vector<double> theta_scale() const = 0;
};

// Default JZS-style t-test: delta ~ Cauchy(0, r), r ~ Uniform.
class CauchyTTestModel final : public SensitivityModel {
 public:
  CauchyTTestModel(TTestSufficient suff, HyperPrior hyper);

  std::string name() const override { return "ttest-cauchy"; }
  const HyperPrior& hyper_prior() const override { return hyper_; }
  std::size_t theta_dim() const override { return 1; }
  std::vector<std::string> gamma_names() const override { return {"r"}; }
  std::vector<std::string> theta_names() const override { return {"delta"}; }

  double log_likelihood(std::span<const double> theta) const override;
  double log_conditional_prior(std::span<const double> theta,
                               std::span<const double> gamma) const override;
  std::optional<double> log_full_conditional(std::span<const double> gamma,
                                             std::span<const double> theta) const override;

  std::vector<double> initial_theta() const override;
  std::vector<double> theta_scale() const override;

  const TTestSufficient& sufficient() const noexcept { return suff_; }
  const ConditionalPrior& prior() const noexcept { return prior_; }

 private:
  TTestSufficient suff_;
  HyperPrior hyper_;
  ConditionalPrior prior_ = ConditionalPrior::cauchy_scale();
};

// Informed t-test: delta ~ N(mu_delta, sigma_delta^2), both varied.
class InformedTTestModel final : public SensitivityModel {
 public:
  InformedTTestModel(TTestSufficient suff, HyperPrior hyper);

  std::string name() const override { return "ttest-informed"; }
  const HyperPrior& hyper_prior() const override { return hyper_; }
  std::size_t theta_dim() const override { return 1; }
  std::vector<std::string> gamma_names() const override { return {"mu_delta", "sigma_delta"}; }
  std::vector<std::string> theta_names() const override { return {"delta"}; }

  double log_likelihood(std::span<const double> theta) const override;
  double log_conditional_prior(std::span<const double> theta,
                               std::span<const double> gamma) const override;

  std::vector<double> initial_theta() const override;
  std::vector<double> theta_scale() const override;

  const TTestSufficient& sufficient() const noexcept { return suff_; }

 private:
  TTestSufficient suff_;
  HyperPrior hyper_;
  ConditionalPrior prior_ = ConditionalPrior::normal_mean_sd();
};

enum class MetaStructure { FixedEffect, RandomEffects };

// Meta-analytic alternative with mu ~ N(0, sigma_mu^2), sigma_mu varied.
// Fixed effect: theta = (mu). Random effects: theta = (mu, tau), tau ~ IG.
class MetaAlternativeModel final : public SensitivityModel {
 public:
  MetaAlternativeModel(MetaData data, HeterogeneityPrior tau_prior, HyperPrior hyper,
                       MetaStructure structure);

  std::string name() const override;
  const HyperPrior& hyper_prior() const override { return hyper_; }
  std::size_t theta_dim() const override { return structure_ == MetaStructure::FixedEffect ? 1 : 2; }
  std::vector<std::string> gamma_names() const override { return {"sigma_mu"}; }
  std::vector<std::string> theta_names() const override;
  Box theta_domain() const override;

  double log_likelihood(std::span<const double> theta) const override;
  double log_conditional_prior(std::span<const double> theta,
                               std::span<const double> gamma) const override;
  std::optional<double> log_full_conditional(std::span<const double> gamma,
                                             std::span<const double> theta) const override;

  std::vector<double> initial_theta() const override;
  std::vector<double> theta_scale() const override;

  const MetaData& data() const noexcept { return data_; }
  const HeterogeneityPrior& tau_prior() const noexcept { return tau_prior_; }
  MetaStructure structure() const noexcept { return structure_; }

 private:
  MetaData data_;
  HeterogeneityPrior tau_prior_;
  HyperPrior hyper_;
  MetaStructure structure_;
  ConditionalPrior prior_ = ConditionalPrior::normal_sd();
};

// Known-variance normal mean: ybar ~ N(theta, sigma^2/n), theta ~ N(0, gamma^2).
// Z(gamma) and the gamma-posterior are available in closed form.
class ConjugateNormalModel final : public SensitivityModel {
 public:
  ConjugateNormalModel(double ybar, double sigma, int n, HyperPrior hyper);

  std::string name() const override { return "conjugate-normal"; }
  const HyperPrior& hyper_prior() const override { return hyper_; }
  std::size_t theta_dim() const override { return 1; }
  std::vector<std::string> gamma_names() const override { return {"gamma"}; }
  std::vector<std::string> theta_names() const override { return {"theta"}; }

  double log_likelihood(std::span<const double> theta) const override;
  double log_conditional_prior(std::span<const double> theta,
                               std::span<const double> gamma) const override;
  std::optional<double> log_full_conditional(std::span<const double> gamma,
                                             std::span<const double> theta) const override;

  std::vector<double> initial_theta() const override;
  std::vector<double> theta_scale() const override;

  // Closed forms.
  double log_marginal(double gamma) const;
  double log_null_marginal() const;
  // log p(gamma | y) under the uniform hyper-prior (normalizer by quadrature).
  double log_gamma_posterior(double gamma) const;
  double gamma_posterior_cdf(double gamma) const;
  double gamma_posterior_median() const;

  double standard_error() const noexcept { return se_; }

 private:
  double ybar_;
  double se_;
  HyperPrior hyper_;
  double log_norm_;  // log int Z(g) pi(g) dg
};

// log of the normalized full conditional of a normal-sd scale on [L, U]:
// p(s | theta) ∝ s^{-1} exp(-(theta - c)^2 / (2 s^2)).
double normal_sd_log_full_conditional(double s, double theta_minus_center, Interval support);

// log of the normalized full conditional of a Cauchy scale on [L, U]:
// p(r | delta) ∝ r / (delta^2 + r^2).
double cauchy_scale_log_full_conditional(double r, double delta, Interval support);

}  // namespace bfsens
