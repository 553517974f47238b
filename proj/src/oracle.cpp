#include "bfsens/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bfsens/error.hpp"

namespace bfsens {

namespace {

constexpr double kTauLowerQuantile = 1e-100;
constexpr double kTauUpperQuantile = 1.0 - 1e-10;

double finite_or_neg_inf(double v) { return std::isnan(v) ? -INFINITY : v; }

// Precision-weighted mean and sd of mu given tau (the likelihood mode in mu).
std::pair<double, double> meta_mu_mode(const MetaData& data, double tau) {
  double w_sum = 0.0;
  double wy = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = 1.0 / (data.ses[i] * data.ses[i] + tau * tau);
    w_sum += w;
    wy += w * data.effects[i];
  }
  return {wy / w_sum, 1.0 / std::sqrt(w_sum)};
}

// log \int N-likelihood(mu, tau) N(mu; c, s) dmu for fixed tau.
QuadResult integrate_mu(const MetaData& data, double center, double sd, double tau,
                        const QuadratureSpec& quad) {
  // The integrand is Gaussian in mu; place breakpoints around its mean.
  const auto [mode, mode_sd] = meta_mu_mode(data, tau);
  const double precision = 1.0 / (sd * sd) + 1.0 / (mode_sd * mode_sd);
  const double post_mean = (center / (sd * sd) + mode / (mode_sd * mode_sd)) / precision;
  const double post_sd = 1.0 / std::sqrt(precision);
  std::vector<double> bps{post_mean};
  for (double k : {2.0, 5.0, 10.0}) {
    bps.push_back(post_mean - k * post_sd);
    bps.push_back(post_mean + k * post_sd);
  }
  auto log_f = [&](double mu) {
    return finite_or_neg_inf(meta_loglik(data, mu, tau) + normal_logpdf(mu, center, sd));
  };
  return log_integrate(log_f, -INFINITY, INFINITY, std::move(bps), post_sd, quad);
}

// log \int h(tau) p(tau) dtau on u = log(tau) over the prior's quantile range.
QuadResult integrate_log_tau(const std::function<double(double)>& log_h, const HeterogeneityPrior& prior,
                             const QuadratureSpec& quad) {
  const double lo = std::log(prior.quantile(kTauLowerQuantile));
  const double hi = std::log(prior.quantile(kTauUpperQuantile));
  auto log_g = [&](double u) {
    const double tau = std::exp(u);
    return finite_or_neg_inf(log_h(tau) + prior.logpdf(tau) + u);
  };

  constexpr int kScan = 33;
  constexpr int kPieces = 16;
  double best_u = lo;
  double best = -INFINITY;
  for (int i = 0; i < kScan; ++i) {
    const double u = lo + (hi - lo) * i / (kScan - 1);
    const double v = log_g(u);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  const double step = (hi - lo) / kPieces;
  std::vector<double> bps;
  for (int i = 1; i < kPieces; ++i) bps.push_back(lo + i * step);
  for (double d : {-0.5 * step, 0.0, 0.5 * step}) bps.push_back(best_u + d);
  return log_integrate(log_g, lo, hi, std::move(bps), 1.0, quad);
}

void require_inside(const HyperPrior& hyper, std::span<const double> gamma) {
  if (gamma.size() != hyper.dim() || !hyper.bounds.contains_open(gamma))
    throw ValidationError("anchor must lie strictly inside the hyper-prior support");
}

}  // namespace

QuadResult marginal_likelihood_ttest(const TTestSufficient& suff, const ConditionalPrior& prior,
                                     std::span<const double> gamma, const QuadratureSpec& quad) {
  const double loc = prior.location(gamma);
  const double scale = prior.scale(gamma);
  if (!(scale > 0.0)) throw DomainError("prior scale must be positive");
  const double se = 1.0 / std::sqrt(suff.n_eff);
  const double mode = suff.t * se;

  std::vector<double> bps{loc, mode};
  for (double k : {2.0, 10.0}) {
    bps.push_back(loc - k * scale);
    bps.push_back(loc + k * scale);
  }
  for (double k : {3.0, 8.0}) {
    bps.push_back(mode - k * se);
    bps.push_back(mode + k * se);
  }
  auto log_f = [&](double delta) {
    return finite_or_neg_inf(ttest_loglik(suff, delta) + prior.logpdf(delta, gamma));
  };
  return log_integrate(log_f, -INFINITY, INFINITY, std::move(bps), se, quad);
}

QuadResult marginal_likelihood_ttest_null(const TTestSufficient& suff) {
  return {ttest_loglik(suff, 0.0), 0.0};
}

QuadResult marginal_likelihood_meta(const MetaData& data, const std::optional<ConditionalPrior>& prior_mu,
                                    std::span<const double> gamma,
                                    const std::optional<HeterogeneityPrior>& prior_tau,
                                    const QuadratureSpec& quad) {
  data.validate();
  double center = 0.0;
  double sd = 0.0;
  if (prior_mu) {
    center = prior_mu->location(gamma);
    sd = prior_mu->scale(gamma);
    if (!(sd > 0.0)) throw DomainError("prior scale on mu must be positive");
  }

  if (!prior_tau) {
    if (!prior_mu) return {meta_loglik(data, 0.0, 0.0), 0.0};
    return integrate_mu(data, center, sd, 0.0, quad);
  }
  prior_tau->validate();

  if (!prior_mu) {
    return integrate_log_tau([&](double tau) { return meta_loglik(data, 0.0, tau); }, *prior_tau, quad);
  }

  // Nested: the inner mu integral is solved tighter than the outer target so
  // that its error does not register as roughness in the outer rule.
  QuadratureSpec inner = quad;
  inner.abs_tol = quad.abs_tol * 1e-2;
  inner.rel_tol = quad.rel_tol * 1e-2;
  double inner_error = 0.0;
  auto log_h = [&](double tau) {
    const QuadResult r = integrate_mu(data, center, sd, tau, inner);
    inner_error = std::max(inner_error, r.error);
    return r.value;
  };
  QuadResult out = integrate_log_tau(log_h, *prior_tau, quad);
  out.error += inner_error;
  return out;
}

QuadResult ExactBayesFactor::log_bf(std::span<const double> gamma, const QuadratureSpec& quad) const {
  const QuadResult alt = log_marginal(gamma, quad);
  const QuadResult null = log_null_marginal(quad);
  return {alt.value - null.value, alt.error + null.error};
}

QuadResult TTestOracle::log_marginal(std::span<const double> gamma, const QuadratureSpec& quad) const {
  return marginal_likelihood_ttest(suff_, prior_, gamma, quad);
}

QuadResult TTestOracle::log_null_marginal(const QuadratureSpec&) const {
  return marginal_likelihood_ttest_null(suff_);
}

QuadResult MetaComponentOracle::log_marginal(std::span<const double> gamma, const QuadratureSpec& quad) const {
  return marginal_likelihood_meta(data_, ConditionalPrior::normal_sd(), gamma, tau_prior_, quad);
}

QuadResult MetaComponentOracle::log_null_marginal(const QuadratureSpec& quad) const {
  return marginal_likelihood_meta(data_, std::nullopt, {}, std::nullopt, quad);
}

QuadResult ConjugateOracle::log_marginal(std::span<const double> gamma, const QuadratureSpec&) const {
  return {model_->log_marginal(gamma[0]), 0.0};
}

QuadResult ConjugateOracle::log_null_marginal(const QuadratureSpec&) const {
  return {model_->log_null_marginal(), 0.0};
}

AnchorResult anchor_bf(const ExactBayesFactor& oracle, const HyperPrior& hyper,
                       std::span<const double> gamma0, const QuadratureSpec& quad) {
  require_inside(hyper, gamma0);
  const QuadResult r = oracle.log_bf(gamma0, quad);
  return {{gamma0.begin(), gamma0.end()}, r.value, "quadrature:" + to_string(quad.method), r.error};
}

SensitivityCurve exact_bf_curve(const ExactBayesFactor& oracle, const HyperPrior& hyper,
                                const Matrix& grid, const QuadratureSpec& quad,
                                const std::optional<std::vector<double>>& gamma0) {
  if (grid.cols() != hyper.dim()) throw ValidationError("grid dimension does not match the hyper-prior");
  SensitivityCurve curve;
  curve.grid = grid;
  curve.support = hyper.bounds;
  curve.method = "exact";
  curve.flags.assign(grid.rows(), PointFlag::Ok);
  curve.log_bf.resize(grid.rows());
  const QuadResult null = oracle.log_null_marginal(quad);
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    if (!hyper.bounds.contains_closed(grid.row(i)))
      throw ValidationError("grid point " + std::to_string(i) + " lies outside the hyper-prior support");
    curve.log_bf[i] = oracle.log_marginal(grid.row(i), quad).value - null.value;
  }
  if (gamma0) {
    curve.anchor = anchor_bf(oracle, hyper, *gamma0, quad);
    curve.anchor_node = nearest_node(grid, *gamma0);
  }
  return curve;
}

void EnsembleSpec::validate() const {
  const double p[] = {p_fe_null, p_re_null, p_fe_alt, p_re_alt};
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("prior model probabilities must lie in [0, 1]");
  if (std::abs(p[0] + p[1] + p[2] + p[3] - 1.0) > 1e-9)
    throw ValidationError("prior model probabilities must sum to 1");
  if (p_fe_null + p_re_null <= 0.0 || p_fe_alt + p_re_alt <= 0.0)
    throw ValidationError("the ensemble needs at least one null and one alternative component");
}

BmaComponents bma_components(const MetaData& data, const HeterogeneityPrior& tau_prior, double sigma_mu,
                             const QuadratureSpec& quad) {
  const double g[] = {sigma_mu};
  const auto prior = ConditionalPrior::normal_sd();
  const QuadResult fe0 = marginal_likelihood_meta(data, std::nullopt, {}, std::nullopt, quad);
  const QuadResult re0 = marginal_likelihood_meta(data, std::nullopt, {}, tau_prior, quad);
  const QuadResult fe1 = marginal_likelihood_meta(data, prior, g, std::nullopt, quad);
  const QuadResult re1 = marginal_likelihood_meta(data, prior, g, tau_prior, quad);
  BmaComponents z;
  z.log_bf_fe_alt = fe1.value - fe0.value;
  z.log_bf_re_alt = re1.value - fe0.value;
  z.log_bf_re_null = re0.value - fe0.value;
  z.est_error = fe0.error + re0.error + fe1.error + re1.error;
  return z;
}

double log_inclusion_bf(const BmaComponents& z, const EnsembleSpec& e) {
  auto term = [](double p, double log_z) { return p > 0.0 ? std::log(p) + log_z : -INFINITY; };
  const double num[] = {term(e.p_fe_alt, z.log_bf_fe_alt), term(e.p_re_alt, z.log_bf_re_alt)};
  const double den[] = {term(e.p_fe_null, z.log_bf_fe_null), term(e.p_re_null, z.log_bf_re_null)};
  return log_sum_exp(num) - log_sum_exp(den);
}

SensitivityCurve exact_inclusion_bf_curve(const MetaData& data, const HeterogeneityPrior& tau_prior,
                                          const EnsembleSpec& ensemble, const HyperPrior& hyper,
                                          const Matrix& grid, const QuadratureSpec& quad,
                                          std::optional<double> sigma0) {
  ensemble.validate();
  if (hyper.dim() != 1 || grid.cols() != 1) throw ValidationError("inclusion curves are one-dimensional");
  SensitivityCurve curve;
  curve.grid = grid;
  curve.support = hyper.bounds;
  curve.method = "exact";
  curve.flags.assign(grid.rows(), PointFlag::Ok);
  curve.log_bf.resize(grid.rows());
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    if (!hyper.bounds.contains_closed(grid.row(i)))
      throw ValidationError("grid point " + std::to_string(i) + " lies outside the hyper-prior support");
    curve.log_bf[i] = log_inclusion_bf(bma_components(data, tau_prior, grid(i, 0), quad), ensemble);
  }
  if (sigma0) {
    const double g[] = {*sigma0};
    require_inside(hyper, g);
    const BmaComponents z = bma_components(data, tau_prior, *sigma0, quad);
    curve.anchor = {{*sigma0}, log_inclusion_bf(z, ensemble), "quadrature:" + to_string(quad.method),
                    z.est_error};
    curve.anchor_node = nearest_node(grid, g);
  }
  return curve;
}

}  // namespace bfsens
