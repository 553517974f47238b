#pragma once

// Exact marginal likelihoods by deterministic quadrature. These are the
// ground truth for validation and the anchors for the density-ratio curves.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfsens/curve.hpp"
#include "bfsens/extended_model.hpp"
#include "bfsens/model.hpp"
#include "bfsens/quadrature.hpp"

namespace bfsens {

// log Z(gamma) = log \int p(t | delta) p(delta | gamma) d delta.
QuadResult marginal_likelihood_ttest(const TTestSufficient& suff, const ConditionalPrior& prior,
                                     std::span<const double> gamma, const QuadratureSpec& quad);

// Point null delta = 0.
QuadResult marginal_likelihood_ttest_null(const TTestSufficient& suff);

// Marginal likelihood of one of the four meta-analytic components. A missing
// mu prior fixes mu = 0; a missing tau prior fixes tau = 0. Zero, one or two
// dimensions are integrated accordingly; tau is integrated on log(tau) over
// the prior's [1e-100, 1 - 1e-10] quantile range.
QuadResult marginal_likelihood_meta(const MetaData& data, const std::optional<ConditionalPrior>& prior_mu,
                                    std::span<const double> gamma,
                                    const std::optional<HeterogeneityPrior>& prior_tau,
                                    const QuadratureSpec& quad);

class ExactBayesFactor {
 public:
  virtual ~ExactBayesFactor() = default;

  virtual std::string name() const = 0;
  virtual std::size_t gamma_dim() const = 0;
  virtual QuadResult log_marginal(std::span<const double> gamma, const QuadratureSpec& quad) const = 0;
  virtual QuadResult log_null_marginal(const QuadratureSpec& quad) const = 0;

  // log BF10(gamma); the error is the sum of both log-scale error bounds.
  QuadResult log_bf(std::span<const double> gamma, const QuadratureSpec& quad) const;
};

class TTestOracle final : public ExactBayesFactor {
 public:
  TTestOracle(TTestSufficient suff, ConditionalPrior prior) : suff_(suff), prior_(prior) {}

  std::string name() const override { return "ttest-" + to_string(prior_.kind); }
  std::size_t gamma_dim() const override { return prior_.gamma_dim(); }
  QuadResult log_marginal(std::span<const double> gamma, const QuadratureSpec& quad) const override;
  QuadResult log_null_marginal(const QuadratureSpec& quad) const override;

 private:
  TTestSufficient suff_;
  ConditionalPrior prior_;
};

// One meta-analytic alternative component against the fixed-effect null.
class MetaComponentOracle final : public ExactBayesFactor {
 public:
  MetaComponentOracle(MetaData data, std::optional<HeterogeneityPrior> tau_prior)
      : data_(std::move(data)), tau_prior_(tau_prior) {}

  std::string name() const override { return tau_prior_ ? "meta-re-alt" : "meta-fe-alt"; }
  std::size_t gamma_dim() const override { return 1; }
  QuadResult log_marginal(std::span<const double> gamma, const QuadratureSpec& quad) const override;
  QuadResult log_null_marginal(const QuadratureSpec& quad) const override;

 private:
  MetaData data_;
  std::optional<HeterogeneityPrior> tau_prior_;
};

// Closed-form Z(gamma) of the conjugate normal model; no quadrature involved.
class ConjugateOracle final : public ExactBayesFactor {
 public:
  explicit ConjugateOracle(const ConjugateNormalModel& model) : model_(&model) {}

  std::string name() const override { return "conjugate-normal"; }
  std::size_t gamma_dim() const override { return 1; }
  QuadResult log_marginal(std::span<const double> gamma, const QuadratureSpec& quad) const override;
  QuadResult log_null_marginal(const QuadratureSpec& quad) const override;

 private:
  const ConjugateNormalModel* model_;
};

// Throws ValidationError unless gamma0 is strictly inside the hyper-prior box.
AnchorResult anchor_bf(const ExactBayesFactor& oracle, const HyperPrior& hyper,
                       std::span<const double> gamma0, const QuadratureSpec& quad);

// Per-point exact log BF10 over `grid`; flags are all Ok. When gamma0 is
// given the anchor is computed through the same code path as anchor_bf.
SensitivityCurve exact_bf_curve(const ExactBayesFactor& oracle, const HyperPrior& hyper,
                                const Matrix& grid, const QuadratureSpec& quad,
                                const std::optional<std::vector<double>>& gamma0 = std::nullopt);

// Prior model probabilities of the four-model meta-analytic ensemble.
struct EnsembleSpec {
  double p_fe_null = 0.25;
  double p_re_null = 0.25;
  double p_fe_alt = 0.25;
  double p_re_alt = 0.25;

  void validate() const;
};

// log marginal likelihoods of the four components, all relative to the
// fixed-effect null (so log_bf_fe_null is 0 by definition).
struct BmaComponents {
  double log_bf_fe_alt = 0.0;
  double log_bf_re_alt = 0.0;
  double log_bf_re_null = 0.0;
  double log_bf_fe_null = 0.0;
  double est_error = 0.0;
};

BmaComponents bma_components(const MetaData& data, const HeterogeneityPrior& tau_prior,
                             double sigma_mu, const QuadratureSpec& quad);

double log_inclusion_bf(const BmaComponents& z, const EnsembleSpec& ensemble);

// Exact inclusion BF over a sigma_mu grid (refits every point by quadrature).
SensitivityCurve exact_inclusion_bf_curve(const MetaData& data, const HeterogeneityPrior& tau_prior,
                                          const EnsembleSpec& ensemble, const HyperPrior& hyper,
                                          const Matrix& grid, const QuadratureSpec& quad,
                                          std::optional<double> sigma0 = std::nullopt);

}  // namespace bfsens
