#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bfsens/error.hpp"
#include "bfsens/model.hpp"

using namespace bfsens;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Second route to the noncentral-t density: the normal / chi-square mixture
// p(x) = \int phi(x sqrt(u / nu) - ncp) sqrt(u / nu) f_chi2(u; nu) du.
double mixture_logpdf(double x, double nu, double ncp) {
  const boost::math::chi_squared chi(nu);
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double s = std::sqrt(u / nu);
    const double z = x * s - ncp;
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI) * s * boost::math::pdf(chi, u);
  };
  const double hi = nu + 60.0 * std::sqrt(2.0 * nu) + 200.0;
  return std::log(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, hi, 25, 1e-13));
}

TTestData oosterwijk() { return {53, 57, 4.63, 4.87, 1.48, 1.32}; }

}  // namespace

TEST_CASE("pooled t statistic for the Oosterwijk data") {
  const TTestSufficient s = ttest_sufficient(oosterwijk());
  CHECK_THAT(s.t, WithinRel(-0.89881935804704527, 1e-14));
  CHECK(s.df == 108.0);
  CHECK_THAT(s.n_eff, WithinRel(27.463636363636365, 1e-14));
}

TEST_CASE("equal means give t = 0") {
  const TTestSufficient s = ttest_sufficient({2, 2, 0.0, 0.0, 1.0, 1.0});
  CHECK(s.t == 0.0);
  CHECK(s.df == 2.0);
}

TEST_CASE("swapping the groups flips t only") {
  TTestData a = oosterwijk();
  TTestData b{a.n2, a.n1, a.mean2, a.mean1, a.sd2, a.sd1};
  const auto sa = ttest_sufficient(a);
  const auto sb = ttest_sufficient(b);
  CHECK_THAT(sa.t, WithinRel(-sb.t, 1e-15));
  CHECK(sa.df == sb.df);
  CHECK(sa.n_eff == sb.n_eff);
  CHECK(sa.n_eff <= std::min(a.n1, a.n2));
}

TEST_CASE("t-test data validation") {
  TTestData d = oosterwijk();
  d.n1 = 1;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = oosterwijk();
  d.sd2 = -1.0;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = oosterwijk();
  d.sd1 = 0.0;
  CHECK_THROWS_AS(ttest_sufficient(d), ValidationError);
}

TEST_CASE("central t log-density at zero with 10 df") {
  // log(Gamma(5.5) / (Gamma(5) sqrt(10 pi))).
  const double expected = std::lgamma(5.5) - std::lgamma(5.0) - 0.5 * std::log(10.0 * M_PI);
  CHECK_THAT(expected, WithinAbs(-0.94389735215095225, 1e-15));
  const TTestSufficient s{0.0, 10, 5.0};
  CHECK_THAT(ttest_loglik(s, 0.0), WithinAbs(expected, 1e-12));
}

TEST_CASE("noncentral t at delta = 0 is the central t") {
  for (double t : {-3.0, -0.5, 0.0, 1.2, 7.0})
    for (double df : {1.0, 4.0, 30.0, 250.0}) {
      const double central = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI) -
                             (df + 1) / 2 * std::log1p(t * t / df);
      CHECK_THAT(noncentral_t_logpdf(t, df, 0.0), WithinAbs(central, 1e-10));
    }
}

TEST_CASE("noncentral t frozen high-precision values") {
  struct Case {
    double x, df, ncp, expected;
  };
  // Values from 50-digit evaluation of the Hermite-integral representation.
  const std::array<Case, 11> cases{{
      {-0.8988, 108, 0, -1.3273969483327585},
      {-0.8988, 108, -1, -0.92801013414920264},
      {2.5, 5, 3, -1.257365960924031},
      {-3, 2, 4, -15.343987749065594},
      {40, 500, 30, -21.314977425876836},
      {-50, 3, -20, -5.4751970000918552},
      {0, 10, 0, -0.94389735215095225},
      {-0.898819358047044537, 108, 0.9, -2.5387126264085349},
      {0.5, 1, 20, -158.257921586622},
      {1, 30, -29, -445.00316640609999},
      {-50, 500, 30, -1361.3622244073019},
  }};
  for (const auto& c : cases) {
    INFO("x=" << c.x << " df=" << c.df << " ncp=" << c.ncp);
    CHECK_THAT(noncentral_t_logpdf(c.x, c.df, c.ncp), WithinRel(c.expected, 1e-9));
  }
}

TEST_CASE("noncentral t agrees with the chi-square mixture route") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-6.0, 6.0), ud(-5.0, 5.0), ul(0.0, std::log(300.0));
  for (int i = 0; i < 40; ++i) {
    const double x = ux(rng), ncp = ud(rng), df = 1.0 + std::exp(ul(rng));
    INFO("x=" << x << " df=" << df << " ncp=" << ncp);
    CHECK_THAT(noncentral_t_logpdf(x, df, ncp), WithinAbs(mixture_logpdf(x, df, ncp), 1e-8));
  }
}

TEST_CASE("noncentral t agrees with Boost where Boost is accurate") {
  for (double ncp : {-2.0, 0.5, 1.5})
    for (double x : {-1.0, 0.3, 2.0}) {
      const boost::math::non_central_t d(12.0, ncp);
      CHECK_THAT(noncentral_t_logpdf(x, 12.0, ncp), WithinAbs(std::log(boost::math::pdf(d, x)), 1e-9));
    }
}

TEST_CASE("noncentral t density integrates to one over t") {
  const TTestSufficient base{0.0, 20, 10.0};
  auto f = [&](double t) { return std::exp(noncentral_t_logpdf(t, base.df, 1.0)); };
  const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 20, 1e-12);
  CHECK_THAT(total, WithinAbs(1.0, 1e-9));
}

TEST_CASE("ttest_loglik scales delta by sqrt(n_eff)") {
  const TTestSufficient s = ttest_sufficient(oosterwijk());
  const double delta = -0.2;
  CHECK(ttest_loglik(s, delta) == noncentral_t_logpdf(s.t, s.df, delta * std::sqrt(s.n_eff)));
}

TEST_CASE("meta likelihood special cases") {
  SECTION("single standard-normal study") {
    const MetaData d{{0.0}, {1.0}};
    CHECK_THAT(meta_loglik(d, 0.0, 0.0), WithinAbs(-0.91893853320467274, 1e-15));
  }
  SECTION("tau = 0 is the fixed-effect product") {
    const MetaData d{{0.3, -0.1, 0.8}, {0.2, 0.5, 0.3}};
    double fe = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) fe += normal_logpdf(d.effects[i], 0.25, d.ses[i]);
    CHECK_THAT(meta_loglik(d, 0.25, 0.0), WithinAbs(fe, 1e-13));
  }
  SECTION("K = 3 synthetic dataset against an mpmath sum") {
    // gen-meta with k = 3 and the default seed; value from a 30-digit sum of
    // normal log-densities at mu = 0.2, tau = 0.1.
    const MetaData d{{0.30760125044319647, 0.42614321401323607, 0.37016948864383503}, {0.08, 0.14, 0.2}};
    CHECK_THAT(meta_loglik(d, 0.2, 0.1), WithinAbs(1.0498486523605662, 1e-13));
  }
  SECTION("validation") {
    CHECK_THROWS_AS((MetaData{{}, {}}).validate(), ValidationError);
    CHECK_THROWS_AS((MetaData{{0.1, 0.2}, {0.1}}).validate(), ValidationError);
    CHECK_THROWS_AS((MetaData{{0.1}, {0.0}}).validate(), ValidationError);
  }
}

TEST_CASE("conditional prior modes") {
  const double one[1] = {1.0};
  CHECK_THAT(ConditionalPrior::cauchy_scale().logpdf(0.0, one), WithinAbs(-std::log(M_PI), 1e-15));
  const double ms[2] = {0.4, 0.25};
  CHECK_THAT(ConditionalPrior::normal_mean_sd().logpdf(0.4, ms),
             WithinAbs(-std::log(0.25 * std::sqrt(2.0 * M_PI)), 1e-15));
  const double zero[1] = {0.0};
  CHECK_THROWS_AS(ConditionalPrior::normal_sd().logpdf(0.1, zero), DomainError);
}

TEST_CASE("Cauchy-scale prior ratio identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(-5.0, 5.0), ug(0.01, 3.0);
  const auto prior = ConditionalPrior::cauchy_scale();
  for (int i = 0; i < 100; ++i) {
    const double th = ut(rng), g[1] = {ug(rng)}, gs[1] = {ug(rng)};
    const double identity = std::log(gs[0] * (th * th + g[0] * g[0]) / (g[0] * (th * th + gs[0] * gs[0])));
    CHECK_THAT(prior.logpdf(th, gs) - prior.logpdf(th, g), WithinAbs(identity, 1e-12));
  }
}

TEST_CASE("uniform hyper-prior") {
  const HyperPrior h = HyperPrior::uniform(Interval{0.0, 1.0}, Interval{0.05, 1.0});
  const double in[2] = {0.3, 0.5}, edge[2] = {0.0, 0.5}, out[2] = {1.2, 0.5};
  CHECK_THAT(h.logpdf(in), WithinAbs(-std::log(0.95), 1e-15));
  CHECK(h.contains(in));
  CHECK_FALSE(h.contains(edge));
  CHECK(std::isinf(h.logpdf(out)));
  CHECK_THROWS_AS(HyperPrior::uniform(1.0, 1.0).validate(), ValidationError);
}

TEST_CASE("inverse-gamma heterogeneity prior") {
  const HeterogeneityPrior p{1.0, 0.15};
  // IG(1, b): pdf = b / tau^2 exp(-b / tau).
  CHECK_THAT(p.logpdf(0.2), WithinAbs(std::log(0.15 / 0.04) - 0.75, 1e-14));
  CHECK(std::isinf(p.logpdf(0.0)));
  CHECK_THAT(p.cdf(p.quantile(0.3)), WithinAbs(0.3, 1e-12));
  auto f = [&](double t) { return std::exp(p.logpdf(t)); };
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, p.quantile(0.9), 20, 1e-12);
  CHECK_THAT(mass, WithinAbs(0.9, 1e-9));
}
