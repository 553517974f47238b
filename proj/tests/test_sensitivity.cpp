#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "bfsens/error.hpp"
#include "bfsens/rng.hpp"
#include "bfsens/sensitivity.hpp"
#include "experiments.hpp"

using namespace bfsens;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TTestSufficient oosterwijk() { return ttest_sufficient({53, 57, 4.63, 4.87, 1.48, 1.32}); }

AnchorResult anchor_at(std::vector<double> g0, double log_bf) { return {std::move(g0), log_bf, "test", 0.0}; }

double tn_pdf(double x, double m, double s) { return std::exp(-0.5 * (x - m) * (x - m) / (s * s)); }

SensitivityCurve cauchy_oracle(const Matrix& grid) {
  const TTestOracle oracle(oosterwijk(), ConditionalPrior::cauchy_scale());
  return exact_bf_curve(oracle, HyperPrior::uniform(0.0, 2.0), grid, QuadratureSpec{},
                        std::vector<double>{std::sqrt(2.0) / 2.0});
}

}  // namespace

TEST_CASE("curve identity at the anchor and for flat densities") {
  const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
  const Matrix grid = linear_grid(0.1, 2.0, 20);
  const FunctionDensity flat(hyper.bounds, [](std::span<const double>) { return 0.5; });
  const auto c = bf_curve(anchor_at({grid(5, 0)}, -0.7), flat, hyper, grid);
  for (double v : c.log_bf) CHECK_THAT(v, WithinAbs(-0.7, 1e-15));
  CHECK(c.anchor_node == 5);

  const FunctionDensity bump(hyper.bounds, [](std::span<const double> g) { return tn_pdf(g[0], 0.6, 0.4); });
  const auto b = bf_curve(anchor_at({grid(7, 0)}, 1.25), bump, hyper, grid);
  CHECK(b.log_bf[7] == 1.25);
}

TEST_CASE("analytic gamma-posterior reproduces the closed-form curve") {
  const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
  const ConjugateNormalModel model(0.3, 1.0, 40, hyper);
  const ConjugateOracle oracle(model);
  const Matrix grid = default_grid(hyper, 100);
  const auto exact = exact_bf_curve(oracle, hyper, grid, QuadratureSpec{}, std::vector<double>{1.0});
  const FunctionDensity dens(hyper.bounds,
                             [&](std::span<const double> g) { return std::exp(model.log_gamma_posterior(g[0])); });
  const auto est = bf_curve(exact.anchor, dens, hyper, grid);
  for (std::size_t i = 0; i < grid.rows(); ++i) CHECK_THAT(est.log_bf[i], WithinAbs(exact.log_bf[i], 1e-10));
}

TEST_CASE("anchor shift moves the whole curve") {
  const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
  const Matrix grid = default_grid(hyper, 50);
  const FunctionDensity dens(hyper.bounds, [](std::span<const double> g) { return tn_pdf(g[0], 0.3, 0.5); });
  Philox4x32 rng(1, 0);
  for (int k = 0; k < 20; ++k) {
    const double eps = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 10.0;
    const auto a = bf_curve(anchor_at({0.5}, 0.2), dens, hyper, grid);
    const auto b = bf_curve(anchor_at({0.5}, 0.2 + eps), dens, hyper, grid);
    for (std::size_t i = 0; i < grid.rows(); ++i) CHECK_THAT(b.log_bf[i] - a.log_bf[i], WithinAbs(eps, 1e-13));
  }
}

TEST_CASE("anchor placement errors") {
  const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
  const Matrix grid = default_grid(hyper, 10);
  const FunctionDensity zero_left(hyper.bounds, [](std::span<const double> g) { return g[0] < 1.0 ? 0.0 : 1.0; });
  CHECK_THROWS_AS(bf_curve(anchor_at({0.5}, 0.0), zero_left, hyper, grid), AnchorPlacementError);
}

TEST_CASE("sparse regions carry no value") {
  const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
  const CauchyTTestModel model(oosterwijk(), hyper);
  ChainConfig cfg;
  cfg.n_keep = 1000;
  const PosteriorDraws d = sample_extended(model, cfg);
  // Draws confined to [0.5, 1.5]: the mask blanks both ends.
  PosteriorDraws clipped = d;
  clipped.gamma = Matrix(0, 1);
  clipped.theta = Matrix(0, 1);
  clipped.chain_id.clear();
  clipped.iteration.clear();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.gamma(i, 0) > 0.5 && d.gamma(i, 0) < 1.5) {
      clipped.gamma.append_row(d.gamma.row(i));
      clipped.theta.append_row(d.theta.row(i));
      clipped.chain_id.push_back(d.chain_id[i]);
      clipped.iteration.push_back(d.iteration[i]);
    }
  const auto dens = iwmde_fit(clipped, model, IwmdeWeight::Uniform);
  const auto c = bf_curve(anchor_at({1.0}, -1.0), *dens, hyper, default_grid(hyper, 100));
  CHECK(c.flags.front() == PointFlag::Sparse);
  CHECK(c.flags.back() == PointFlag::Sparse);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.ok(i) != std::isnan(c.log_bf[i]));
}

TEST_CASE("separable surface is the composition of two curves") {
  const HyperPrior hyper = HyperPrior::uniform(Interval{0.0, 1.0}, Interval{0.0, 1.0});
  const HyperPrior h1 = HyperPrior::uniform(0.0, 1.0);
  auto f1 = [](double x) { return tn_pdf(x, 0.3, 0.25) + 0.1; };
  auto f2 = [](double y) { return tn_pdf(y, 0.7, 0.4) + 0.2; };
  const FunctionDensity joint(hyper.bounds, [&](std::span<const double> g) { return f1(g[0]) * f2(g[1]); });
  const FunctionDensity d1(h1.bounds, [&](std::span<const double> g) { return f1(g[0]); });
  const FunctionDensity d2(h1.bounds, [&](std::span<const double> g) { return f2(g[0]); });

  const Matrix lat = lattice(Interval{0.0, 1.0}, 11, Interval{0.05, 1.0}, 11);
  const double a0 = -0.4;
  const auto surf = bf_surface(anchor_at({0.5, 0.5}, a0), joint, hyper, lat);
  const auto c1 = bf_curve(anchor_at({0.5}, a0), d1, h1, linear_grid(0.0, 1.0, 11));
  const auto c2 = bf_curve(anchor_at({0.5}, a0), d2, h1, linear_grid(0.05, 1.0, 11));
  for (std::size_t i = 0; i < 11; ++i)
    for (std::size_t j = 0; j < 11; ++j)
      CHECK_THAT(surf.log_bf[i * 11 + j], WithinAbs(c1.log_bf[i] + c2.log_bf[j] - a0, 1e-8));
}

TEST_CASE("inclusion curve from separately fitted components") {
  const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
  const Matrix grid = default_grid(hyper, 40);
  const FunctionDensity flat(hyper.bounds, [](std::span<const double>) { return 0.5; });
  const FunctionDensity bump(hyper.bounds, [](std::span<const double> g) { return tn_pdf(g[0], 0.8, 0.5); });

  SECTION("equal components give BF_incl = 1") {
    const auto c = inclusion_bf_curve_bridge(BmaComponents{}, 1.0, flat, flat, hyper, EnsembleSpec{}, grid);
    for (double v : c.log_bf) CHECK_THAT(v, WithinAbs(0.0, 1e-14));
  }
  SECTION("a fixed-effect-only ensemble reduces to bf_curve") {
    const BmaComponents z{0.9, -3.0, 0.4, 0.0, 0.0};
    const auto c = inclusion_bf_curve_bridge(z, 1.0, bump, flat, hyper, EnsembleSpec{0.5, 0.0, 0.5, 0.0}, grid);
    const auto plain = bf_curve(anchor_at({1.0}, 0.9), bump, hyper, grid);
    for (std::size_t i = 0; i < grid.rows(); ++i) CHECK_THAT(c.log_bf[i], WithinAbs(plain.log_bf[i], 1e-12));
  }
}

TEST_CASE("meta-analysis strategies against quadrature refits on K = 3") {
  app::BmaSetup setup;
  setup.data = MetaData{{0.30760125044319647, 0.42614321401323607, 0.37016948864383503}, {0.08, 0.14, 0.2}};
  setup.grid = linear_grid(0.02, 2.0, 100);  // contains the anchor sigma_mu = 1
  setup.validation_grid = app::default_validation_grid(setup.hyper);
  const auto run =
      app::run_bma_experiment(setup, app::BmaStrategy::Both, {"iwmde"}, ChainConfig{}, QuadratureSpec{}, true);
  REQUIRE(run.curves.size() == 2);
  for (const auto& c : run.validation_curves)
    for (std::size_t i = 0; i < c.size(); ++i) {
      INFO(c.method << " sigma_mu=" << c.grid(i, 0));
      REQUIRE(c.ok(i));
      CHECK_THAT(c.log_bf[i], WithinAbs(run.validation.log_bf[i], 0.1));
    }
  // Anchor identity and the sigma_mu -> 0 end heading toward BF_incl = 1.
  for (const auto& c : run.curves) {
    REQUIRE_THAT(c.grid(c.anchor_node, 0), WithinAbs(1.0, 1e-12));
    CHECK_THAT(c.log_bf[c.anchor_node], WithinAbs(c.anchor.log_bf10, 1e-9));
    std::size_t first = 0;
    while (!c.ok(first)) ++first;
    CHECK(std::abs(c.log_bf[first]) < std::abs(c.anchor.log_bf10));
  }
  const auto dual = dual_estimator_diagnostic(run.curves[0], run.curves[1], 0.1);
  CHECK(dual.max_interior_divergence < 0.1);
}

TEST_CASE("error report") {
  const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
  const Matrix grid = default_grid(hyper, 50);
  const FunctionDensity dens(hyper.bounds, [](std::span<const double> g) { return tn_pdf(g[0], 0.3, 0.5); });
  const auto a = bf_curve(anchor_at({1.0}, 0.2), dens, hyper, grid);

  SECTION("identical curves") {
    const auto r = curve_error_report(a, a);
    CHECK(r.mae == 0.0);
    CHECK(r.rmse == 0.0);
    CHECK(r.mae_t == 0.0);
    CHECK(r.n_points == 50);
  }
  SECTION("a constant shift is the anchor-error model") {
    const auto b = bf_curve(anchor_at({1.0}, 0.2 - 0.37), dens, hyper, grid);
    const auto r = curve_error_report(b, a);
    CHECK_THAT(r.mae, WithinAbs(0.37, 1e-13));
    CHECK_THAT(r.rmse, WithinAbs(0.37, 1e-13));
    CHECK_THAT(r.mae_t, WithinAbs(0.37, 1e-13));
    CHECK(r.n_truncated < r.n_points);
  }
  SECTION("truncated region is the central 90% of the support") {
    const double in[1] = {0.1}, out[1] = {0.099};
    CHECK(in_truncated_region(hyper.bounds, in));
    CHECK_FALSE(in_truncated_region(hyper.bounds, out));
  }
}

TEST_CASE("KDE and IWMDE curves on the default t-test") {
  const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
  const CauchyTTestModel model(oosterwijk(), hyper);
  const Matrix grid = default_grid(hyper, 100);
  const auto oracle = cauchy_oracle(grid);

  SECTION("KDE error at 10,000 draws lies in the band around 0.0729") {
    const auto rows = app::run_mcmc_study(model, oracle, {10000}, {"kde"}, ChainConfig{}, true);
    CHECK(rows[0].error.mae < 0.729);
    CHECK(rows[0].error.mae > 0.00729);
  }

  SECTION("dual-estimator diagnostic") {
    const PosteriorDraws d = sample_extended(model, ChainConfig{});
    const auto kde = bf_curve(oracle.anchor, *kde_fit(d.gamma, KdeSpec{}, hyper.bounds), hyper, grid);
    const auto iw = bf_curve(oracle.anchor, *iwmde_fit(d, model, IwmdeWeight::Uniform), hyper, grid);
    const auto same = dual_estimator_diagnostic(iw, iw, 0.05);
    CHECK(same.pass);
    CHECK(same.max_divergence == 0.0);

    // The divergence is bounded by the two interior errors against the oracle.
    double bound = 0.0;
    for (std::size_t i = 0; i < grid.rows(); ++i)
      if (in_truncated_region(hyper.bounds, grid.row(i)) && kde.ok(i) && iw.ok(i))
        bound = std::max(bound, std::abs(kde.log_bf[i] - oracle.log_bf[i]) + std::abs(iw.log_bf[i] - oracle.log_bf[i]));
    const auto good = dual_estimator_diagnostic(kde, iw, bound);
    CHECK(good.max_interior_divergence <= bound + 1e-12);

    KdeSpec wide;
    wide.bandwidth = std::vector<double>{10.0 * plug_in_bandwidth(d.gamma.column(0))};
    const auto blurred = bf_curve(oracle.anchor, *kde_fit(d.gamma, wide, hyper.bounds), hyper, grid);
    const auto bad = dual_estimator_diagnostic(blurred, iw, bound);
    CHECK_FALSE(bad.pass);
    CHECK(bad.max_interior_divergence > good.max_interior_divergence);
  }
}

TEST_CASE("curve CSV round-trips values, flags and the anchor") {
  const HyperPrior hyper = HyperPrior::uniform(Interval{0.0, 1.0}, Interval{0.0, 1.0});
  Philox4x32 rng(3, 0);
  auto unif = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  SensitivityCurve c;
  c.grid = lattice(Interval{0.0, 1.0}, 7, Interval{0.05, 1.0}, 5);
  c.anchor = anchor_at({0.5, 0.5}, -0.123456789012345678);
  c.method = "iwmde";
  c.support = hyper.bounds;
  for (std::size_t i = 0; i < c.grid.rows(); ++i) {
    const bool blank = unif() < 0.2;
    c.flags.push_back(blank ? PointFlag::Blank : PointFlag::Ok);
    c.log_bf.push_back(blank ? NAN : (unif() - 0.5) * 1e3 * std::pow(10.0, -20.0 * unif()));
  }
  std::stringstream ss;
  write_curve_csv(ss, c, {"mu_delta", "sigma_delta"});
  const auto r = read_curve_csv(ss);
  REQUIRE(r.size() == c.size());
  CHECK(r.grid.data() == c.grid.data());
  CHECK(r.flags == c.flags);
  CHECK(r.method == c.method);
  CHECK(r.anchor.gamma0 == c.anchor.gamma0);
  CHECK(r.anchor.log_bf10 == c.anchor.log_bf10);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.ok(i)) CHECK(r.log_bf[i] == c.log_bf[i]);
}
