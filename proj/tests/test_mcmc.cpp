#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/random/normal_distribution.hpp>

#include "bfsens/error.hpp"
#include "bfsens/mcmc.hpp"
#include "bfsens/oracle.hpp"
#include "bfsens/rng.hpp"

using namespace bfsens;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> normal_sample(std::size_t n, double mean, double sd, std::uint64_t seed) {
  Philox4x32 rng(seed, 0);
  boost::random::normal_distribution<double> z(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

// theta ~ N(0, gamma^2) with a constant likelihood: the gamma marginal is the
// hyper-prior itself.
class DataFreeModel final : public SensitivityModel {
 public:
  explicit DataFreeModel(HyperPrior h) : hyper_(std::move(h)) {}
  std::string name() const override { return "data-free"; }
  const HyperPrior& hyper_prior() const override { return hyper_; }
  std::size_t theta_dim() const override { return 1; }
  std::vector<std::string> gamma_names() const override { return {"g"}; }
  std::vector<std::string> theta_names() const override { return {"x"}; }
  double log_likelihood(std::span<const double>) const override { return 0.0; }
  double log_conditional_prior(std::span<const double> theta, std::span<const double> gamma) const override {
    return normal_logpdf(theta[0], 0.0, gamma[0]);
  }
  std::vector<double> initial_theta() const override { return {0.0}; }
  std::vector<double> theta_scale() const override { return {1.0}; }

 private:
  HyperPrior hyper_;
};

// Every k-th value so that the subsample is roughly as large as the ESS.
std::vector<double> thin_to_ess(const std::vector<double>& v, double ess) {
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v.size() / ess)));
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); i += step) out.push_back(v[i]);
  return out;
}

template <typename Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

// Batch-means standard error of a mean.
double batch_se(const std::vector<double>& v, std::size_t batches = 30) {
  const std::size_t m = v.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b)
    means.push_back(std::accumulate(v.begin() + b * m, v.begin() + (b + 1) * m, 0.0) / m);
  const double mu = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double ss = 0.0;
  for (double x : means) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / (batches - 1) / batches);
}

const ParamDiagnostics& diag(const PosteriorDraws& d, const std::string& name) {
  for (const auto& p : d.diagnostics)
    if (p.name == name) return p;
  throw Error("no diagnostics for " + name);
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::generate(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Philox streams are reproducible and distinct") {
  Philox4x32 a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
}

TEST_CASE("diagnostics on constructed chains") {
  Philox4x32 rng(5, 0);
  boost::random::normal_distribution<double> z;

  SECTION("constant chains are degenerate with R-hat 1") {
    const std::vector<double> v(4000, 0.3);
    std::vector<int> chain(4000);
    for (std::size_t i = 0; i < chain.size(); ++i) chain[i] = static_cast<int>(i / 1000);
    const auto p = diagnose(v, chain, "c");
    CHECK(p.degenerate);
    CHECK(p.rhat == 1.0);
  }
  SECTION("iid normal draws, 4 x 5000") {
    std::vector<double> v;
    std::vector<int> chain;
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < 5000; ++i) {
        v.push_back(z(rng));
        chain.push_back(c);
      }
    const auto p = diagnose(v, chain, "x");
    CHECK(p.rhat < 1.005);
    CHECK(p.ess >= 0.8 * 20000);
    CHECK_FALSE(p.degenerate);
  }
  SECTION("chains centred at 0 and 3") {
    std::vector<double> v;
    std::vector<int> chain;
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 5000; ++i) {
        v.push_back(3.0 * c + z(rng));
        chain.push_back(c);
      }
    // Split halves have means (0, 0, 3, 3): B/n = 3, W = 1, so the raw split
    // R-hat is sqrt(4) = 2; rank normalization keeps it far above 1.5.
    const auto p = diagnose(v, chain, "x");
    CHECK(p.rhat > 1.5);
    CHECK(p.rhat < 2.5);
  }
}

TEST_CASE("data-free model recovers the uniform hyper-prior") {
  const DataFreeModel model(HyperPrior::uniform(0.5, 2.0));
  ChainConfig cfg;
  cfg.n_keep = 4000;
  cfg.seed = 3;
  const PosteriorDraws d = sample_extended(model, cfg);
  const auto g = thin_to_ess(d.gamma.column(0), diag(d, "g").ess);
  const double ks = ks_statistic(g, [](double x) { return (x - 0.5) / 1.5; });
  INFO("KS " << ks << " on " << g.size() << " draws");
  CHECK(ks < ks_critical_1pct(g.size()));
}

TEST_CASE("draw layout invariants") {
  const DataFreeModel model(HyperPrior::uniform(0.5, 2.0));
  ChainConfig cfg;
  cfg.n_keep = 1000;
  cfg.n_warmup = 500;
  const PosteriorDraws d = sample_extended(model, cfg);
  REQUIRE(d.size() == 3000);
  CHECK(d.gamma.rows() == d.size());
  CHECK(d.theta.rows() == d.size());
  CHECK_FALSE(d.indicator.has_value());
  CHECK(d.n_chains() == 3);
  for (double g : d.gamma.column(0)) CHECK((g > 0.5 && g < 2.0));
}

TEST_CASE("sampling is deterministic in the seed") {
  const DataFreeModel model(HyperPrior::uniform(0.5, 2.0));
  ChainConfig cfg;
  cfg.n_keep = 1000;
  cfg.n_warmup = 200;
  const auto a = sample_extended(model, cfg);
  const auto b = sample_extended(model, cfg);
  cfg.seed = 2;
  const auto c = sample_extended(model, cfg);
  CHECK(a.gamma.data() == b.gamma.data());
  CHECK(a.theta.data() == b.theta.data());
  CHECK(a.gamma.data() != c.gamma.data());
}

TEST_CASE("extended Cauchy t-test posterior on the Oosterwijk data") {
  const TTestSufficient s = ttest_sufficient({53, 57, 4.63, 4.87, 1.48, 1.32});
  const CauchyTTestModel model(s, HyperPrior::uniform(0.0, 2.0));
  ChainConfig cfg;
  cfg.n_keep = 3000;
  const PosteriorDraws d = sample_extended(model, cfg);
  const auto delta = d.theta.column(0);
  const double mean = std::accumulate(delta.begin(), delta.end(), 0.0) / delta.size();
  CHECK(mean < 0.0);  // sign of t
  CHECK(mean > -0.5);
}

TEST_CASE("conjugate toy: gamma draws follow the analytic posterior (chi-square, 20 bins)") {
  const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
  const ConjugateNormalModel model(0.3, 1.0, 40, hyper);
  ChainConfig cfg;
  cfg.seed = 9;
  const PosteriorDraws d = sample_extended(model, cfg);
  const auto g = thin_to_ess(d.gamma.column(0), diag(d, "gamma").ess);

  // Equiprobable bins under the analytic posterior.
  std::vector<double> edges{0.0};
  for (int k = 1; k < 20; ++k) {
    double lo = edges.back(), hi = 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (model.gamma_posterior_cdf(mid) < k / 20.0 ? lo : hi) = mid;
    }
    edges.push_back(0.5 * (lo + hi));
  }
  edges.push_back(2.0);
  std::vector<double> counts(20, 0.0);
  for (double x : g) counts[std::upper_bound(edges.begin(), edges.end(), x) - edges.begin() - 1] += 1.0;
  const double expected = g.size() / 20.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  INFO("chi2 " << chi2 << " on " << g.size() << " draws");
  CHECK(chi2 < 36.19);  // 1% critical value, 19 df
}

TEST_CASE("require_converged reports the diagnostics table") {
  // Two chains stuck in different places.
  PosteriorDraws d;
  d.gamma_names = {"g"};
  d.theta_names = {"x"};
  const auto left = normal_sample(1000, 0.0, 1.0, 21);
  const auto right = normal_sample(1000, 3.0, 1.0, 22);
  d.gamma = Matrix::from_column(left);
  d.theta = Matrix::from_column(left);
  for (std::size_t i = 0; i < 1000; ++i) {
    d.gamma.append_row(std::span<const double>(&right[i], 1));
    d.theta.append_row(std::span<const double>(&right[i], 1));
  }
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 1000; ++i) {
      d.chain_id.push_back(c);
      d.iteration.push_back(i);
    }
  d.diagnostics = diagnostics(d);
  d.converged = diagnostics_pass(d.diagnostics);
  REQUIRE_FALSE(d.converged);
  CHECK(d.diagnostics[0].rhat > 1.5);
  try {
    require_converged(d);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.what()).find("R-hat") != std::string::npos);
  }
}

TEST_CASE("chain configuration validation") {
  ChainConfig c;
  c.n_chains = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = ChainConfig{};
  c.target_accept = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = ChainConfig{};
  c.n_keep = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("draws CSV round-trips") {
  const DataFreeModel model(HyperPrior::uniform(0.5, 2.0));
  ChainConfig cfg;
  cfg.n_keep = 1000;
  cfg.n_warmup = 100;
  const PosteriorDraws d = sample_extended(model, cfg);
  std::stringstream ss;
  write_draws_csv(ss, d);
  const PosteriorDraws r = read_draws_csv(ss, 1);
  CHECK(r.gamma.data() == d.gamma.data());
  CHECK(r.theta.data() == d.theta.data());
  CHECK(r.chain_id == d.chain_id);
  CHECK(r.iteration == d.iteration);
}

TEST_CASE("moment-matched inverse gamma recovers its parameters") {
  const boost::math::inverse_gamma_distribution<double> ig(6.0, 0.5);
  std::vector<double> tau;
  for (int i = 1; i < 20000; ++i) tau.push_back(boost::math::quantile(ig, i / 20000.0));
  const HeterogeneityPrior p = moment_matched_inverse_gamma(tau);
  CHECK_THAT(p.shape, WithinRel(6.0, 0.05));
  CHECK_THAT(p.scale, WithinRel(0.5, 0.05));
}

TEST_CASE("product space with indistinguishable components visits both equally") {
  // A tau prior pinned near zero makes the random-effects component the
  // fixed-effect one; the pseudo-prior matches it.
  const MetaData data{{0.3, 0.1, 0.25}, {0.1, 0.15, 0.2}};
  const HeterogeneityPrior spike{2000.0, 2e-7};
  ProductSpaceSpec spec;
  spec.p_fe = 0.5;
  spec.p_re = 0.5;
  spec.pseudo_prior = spike;
  ChainConfig cfg;
  cfg.n_keep = 5000;
  const PosteriorDraws d = sample_product_space(spec, data, spike, HyperPrior::uniform(0.0, 2.0), cfg);
  REQUIRE(d.indicator.has_value());
  std::vector<double> z(d.indicator->begin(), d.indicator->end());
  const double p = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
  const double se = batch_se(z);
  INFO("P(RE) " << p << " +- " << se);
  CHECK(std::abs(p - 0.5) < 3.0 * se);
}

TEST_CASE("product space on K = 3 matches quadrature model odds") {
  const MetaData data{{0.30760125044319647, 0.42614321401323607, 0.37016948864383503}, {0.08, 0.14, 0.2}};
  const HeterogeneityPrior tau{1.0, 0.15};
  const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);

  // Posterior odds RE : FE with sigma_mu integrated over its uniform prior.
  auto integrand = [&](double s, bool re) {
    const BmaComponents z = bma_components(data, tau, s, QuadratureSpec{});
    return std::exp(re ? z.log_bf_re_alt : z.log_bf_fe_alt);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  const double z_re = GK::integrate([&](double s) { return integrand(s, true); }, 0.0, 2.0, 0, 1e-9);
  const double z_fe = GK::integrate([&](double s) { return integrand(s, false); }, 0.0, 2.0, 0, 1e-9);
  const double p_exact = z_re / (z_re + z_fe);

  ProductSpaceSpec spec;
  spec.p_fe = 0.5;
  spec.p_re = 0.5;
  HeterogeneityPrior pseudo;
  ChainConfig cfg;
  cfg.seed = 4;
  const PosteriorDraws d = sample_product_space(spec, data, tau, hyper, cfg, &pseudo);
  REQUIRE(d.mixed);
  std::vector<double> z(d.indicator->begin(), d.indicator->end());
  const double p = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
  const double se = batch_se(z);
  INFO("P(RE) sampled " << p << " +- " << se << ", quadrature " << p_exact);
  CHECK(std::abs(p - p_exact) < 3.0 * se);

  SECTION("tau under the fixed-effect state follows the pseudo-prior") {
    const boost::math::inverse_gamma_distribution<double> ig(pseudo.shape, pseudo.scale);
    std::vector<double> t_fe;
    for (std::size_t i = 0; i < d.size(); ++i)
      if ((*d.indicator)[i] == 0) t_fe.push_back(d.theta(i, 1));
    // Redrawn from the pseudo-prior at every FE iteration, so independent.
    const auto sub = thin_to_ess(t_fe, 2000.0);
    const double ks = ks_statistic(sub, [&](double x) { return boost::math::cdf(ig, x); });
    CHECK(ks < ks_critical_1pct(sub.size()));
  }
}

TEST_CASE("product-space spec validation") {
  const MetaData data{{0.3}, {0.1}};
  ProductSpaceSpec spec;
  spec.p_fe = 0.0;
  spec.p_re = 1.0;
  ChainConfig cfg;
  CHECK_THROWS_AS(sample_product_space(spec, data, HeterogeneityPrior{}, HyperPrior::uniform(0.0, 2.0), cfg),
                  ValidationError);
}
