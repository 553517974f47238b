#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfsens/extended_model.hpp"
#include "bfsens/model.hpp"
#include "bfsens/rng.hpp"
#include "bfsens/types.hpp"

namespace bfsens {

struct ChainConfig {
  int n_chains = 3;
  int n_warmup = 2500;
  int n_keep = 10000;  // per chain
  int thin = 1;
  std::uint64_t seed = 1;
  double target_accept = 0.44;
  int adapt_window = 50;  // Robbins-Monro gain (1 + k / adapt_window)^-0.6
  // Random-walk updates of each gamma coordinate per iteration. They touch
  // only the prior terms, so extra sweeps cost no likelihood evaluations.
  int gamma_substeps = 1;

  void validate() const;
};

struct ParamDiagnostics {
  std::string name;
  double rhat = 1.0;
  double ess = 0.0;
  bool degenerate = false;  // all draws identical
};

struct PosteriorDraws {
  std::vector<std::string> gamma_names;
  std::vector<std::string> theta_names;
  Matrix gamma;
  Matrix theta;
  std::optional<std::vector<int>> indicator;  // 0 = fixed effect, 1 = random effects
  std::vector<int> chain_id;
  std::vector<int> iteration;

  std::vector<ParamDiagnostics> diagnostics;
  bool converged = true;
  bool mixed = true;  // product space only: every chain visited both states

  std::size_t size() const noexcept { return chain_id.size(); }
  int n_chains() const;
  // Every kept draw of one chain, in iteration order.
  std::vector<double> chain_column(const Matrix& m, std::size_t col, int chain) const;
};

constexpr double kRhatThreshold = 1.01;
constexpr double kEssThreshold = 400.0;

// Split rank-normalized R-hat (max of bulk and folded) and bulk ESS with
// Geyer's initial monotone sequence truncation.
ParamDiagnostics diagnose(std::span<const double> values, std::span<const int> chain_id,
                          const std::string& name);
std::vector<ParamDiagnostics> diagnostics(const PosteriorDraws& draws);
bool diagnostics_pass(const std::vector<ParamDiagnostics>& diags);
std::string diagnostics_table(const std::vector<ParamDiagnostics>& diags);

// Throws ConvergenceError (with the diagnostics table) unless draws.converged.
void require_converged(const PosteriorDraws& draws);

// Metropolis acceptance on the log scale.
bool metropolis_accept(double log_ratio, Philox4x32& rng);

PosteriorDraws sample_extended(const SensitivityModel& model, const ChainConfig& cfg);

// Two-component (fixed vs random effects) product-space sampler over
// (sigma_mu, mu, tau, z). Under z = FE, tau is drawn from the pseudo-prior.
struct ProductSpaceSpec {
  double p_fe = 0.5;
  double p_re = 0.5;
  std::optional<HeterogeneityPrior> pseudo_prior;  // fitted from a pilot run when absent
  int pilot_keep = 2000;

  void validate() const;
};

// Inverse-Gamma matching the mean and variance of the given positive draws.
HeterogeneityPrior moment_matched_inverse_gamma(std::span<const double> tau);

// The pseudo-prior used is returned through `pseudo_used` when non-null.
PosteriorDraws sample_product_space(const ProductSpaceSpec& spec, const MetaData& data,
                                    const HeterogeneityPrior& tau_prior, const HyperPrior& hyper,
                                    const ChainConfig& cfg, HeterogeneityPrior* pseudo_used = nullptr);

// Columnar CSV: chain,iteration,<gamma...>,<theta...>[,indicator].
void write_draws_csv(std::ostream& out, const PosteriorDraws& draws);
PosteriorDraws read_draws_csv(std::istream& in, std::size_t gamma_dim);

}  // namespace bfsens
