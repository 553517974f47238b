#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "bfsens/csv.hpp"
#include "bfsens/datasets.hpp"
#include "bfsens/error.hpp"
#include "commands.hpp"
#include "experiments.hpp"

namespace bfsens::app {

namespace fs = std::filesystem;

namespace {

constexpr double kAnchorR = 0.70710678118654752;  // sqrt(2) / 2

// Conjugate toy shared by criteria 1 and 8.
constexpr double kToyYbar = 0.3;
constexpr double kToySigma = 1.0;
constexpr int kToyN = 40;
constexpr double kToyAnchor = 1.0;

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

void write_to(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  fn(f);
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Suite {
 public:
  Suite(const AcceptanceOptions& opt, std::ostream& log) : opt_(opt), log_(log) {}

  Verdict run(int id) {
    switch (id) {
      case 1: return exact_identity();
      case 2: return iwmde_accuracy();
      case 3: return kde_trend();
      case 4: return dominance();
      case 5: return surface();
      case 6: return bma_agreement();
      case 7: return anchor_shift();
      case 8: return sddr_chain();
      case 9: return null_collapse();
      case 10: return determinism();
      case 11: return speed_ordering();
      default: throw ValidationError("unknown criterion " + std::to_string(id));
    }
  }

 private:
  using Clock = std::chrono::steady_clock;

  static double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

  const TTestSufficient& suff() {
    if (!suff_) suff_ = ttest_sufficient(read_ttest_json(opt_.ttest_data));
    return *suff_;
  }

  static HyperPrior cauchy_hyper() { return HyperPrior::uniform(0.0, 2.0); }

  const SensitivityCurve& cauchy_oracle() {
    if (!cauchy_oracle_) {
      const TTestOracle oracle(suff(), ConditionalPrior::cauchy_scale());
      cauchy_oracle_ = exact_bf_curve(oracle, cauchy_hyper(), default_grid(cauchy_hyper(), 100), QuadratureSpec{},
                                      std::vector<double>{kAnchorR});
    }
    return *cauchy_oracle_;
  }

  std::vector<StudyRow> study(const std::vector<std::size_t>& counts, const std::vector<std::string>& estimators,
                              std::uint64_t seed) {
    const CauchyTTestModel model(suff(), cauchy_hyper());
    ChainConfig cfg;
    cfg.seed = seed;
    return run_mcmc_study(model, cauchy_oracle(), counts, estimators, cfg, true);
  }

  void write_study(const fs::path& path, const std::vector<StudyRow>& rows) {
    write_to(path, [&](std::ostream& o) {
      o << "n,method,MAE,RMSE,MAE_t,RMSE_t,converged\n";
      for (const auto& r : rows)
        o << r.n << ',' << r.method << ',' << csv::format_double(r.error.mae) << ','
          << csv::format_double(r.error.rmse) << ',' << csv::format_double(r.error.mae_t) << ','
          << csv::format_double(r.error.rmse_t) << ',' << (r.converged ? 1 : 0) << '\n';
    });
  }

  static const StudyRow& row(const std::vector<StudyRow>& rows, std::size_t n, const std::string& method) {
    for (const auto& r : rows)
      if (r.n == n && r.method == method) return r;
    throw Error("missing study row");
  }

  // 1. Analytic gamma-posterior through the curve identity reproduces the
  // closed-form curve.
  Verdict exact_identity() {
    const auto t0 = Clock::now();
    const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
    const ConjugateNormalModel model(kToyYbar, kToySigma, kToyN, hyper);
    const ConjugateOracle oracle(model);
    const Matrix grid = default_grid(hyper, 100);
    const SensitivityCurve exact = exact_bf_curve(oracle, hyper, grid, QuadratureSpec{}, std::vector<double>{kToyAnchor});
    const FunctionDensity dens(hyper.bounds,
                               [&](std::span<const double> g) { return std::exp(model.log_gamma_posterior(g[0])); });
    const SensitivityCurve est = bf_curve(exact.anchor, dens, hyper, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.rows(); ++i) worst = std::max(worst, std::abs(est.log_bf[i] - exact.log_bf[i]));
    const bool fast = since(t0) < 1.0;
    return {worst <= 1e-10 && fast,
            "max |dlogBF| = " + fmt(worst, 3) + " (<= 1e-10) over 100 points; runtime " + (fast ? "< 1 s" : ">= 1 s")};
  }

  // 2. IWMDE truncated MAE at 3,000 and 30,000 draws.
  Verdict iwmde_accuracy() {
    const auto t0 = Clock::now();
    const auto rows = study({3000, 30000}, {"iwmde"}, 1);
    write_study(opt_.artifacts / "c2_iwmde_study.csv", rows);
    const double a = row(rows, 3000, "iwmde").error.mae_t;
    const double b = row(rows, 30000, "iwmde").error.mae_t;
    const bool fast = since(t0) < 120.0;
    return {a <= 0.003 && b <= 0.016 && fast, "MAE_t(3000) = " + fmt(a, 4) + " (<= 0.003); MAE_t(30000) = " +
                                                  fmt(b, 4) + " (<= 0.016); runtime " +
                                                  (fast ? "< 2 min" : ">= 2 min")};
  }

  // 3. KDE accuracy at both ends of the draw-count range and the Table-1
  // ordering against IWMDE.
  Verdict kde_trend() {
    const auto t0 = Clock::now();
    const std::vector<std::size_t> counts{3000, 10000, 30000, 100000, 300000};
    const auto rows = study(counts, {"kde", "iwmde"}, 1);
    write_study(opt_.artifacts / "c3_mcmc_study.csv", rows);
    const ErrorReport lo = row(rows, 3000, "kde").error;
    const ErrorReport hi = row(rows, 300000, "kde").error;
    std::string order;
    bool dominated = true;
    for (auto n : counts) {
      const bool ok = row(rows, n, "iwmde").error.mae_t < row(rows, n, "kde").error.mae_t;
      dominated = dominated && ok;
      if (!ok) order += " n=" + std::to_string(n);
    }
    const bool fast = since(t0) < 600.0;
    const bool pass = lo.mae <= 0.5 && hi.mae <= 0.1 && hi.mae_t < lo.mae_t && dominated && fast;
    return {pass, "KDE MAE(3000) = " + fmt(lo.mae, 4) + " (<= 0.5); KDE MAE(300000) = " + fmt(hi.mae, 4) +
                      " (<= 0.1); KDE MAE_t " + fmt(lo.mae_t, 4) + " -> " + fmt(hi.mae_t, 4) +
                      "; IWMDE MAE_t < KDE MAE_t at every n: " + (dominated ? "yes" : "no, fails at" + order) +
                      "; runtime " + (fast ? "< 10 min" : ">= 10 min")};
  }

  // 4. IWMDE beats KDE at 3,000 draws across 20 seeds.
  Verdict dominance() {
    int wins = 0;
    std::vector<StudyRow> all;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto rows = study({3000}, {"kde", "iwmde"}, seed);
      wins += row(rows, 3000, "iwmde").error.mae_t < row(rows, 3000, "kde").error.mae_t;
      for (auto& r : rows) {
        r.method += ":seed" + std::to_string(seed);
        all.push_back(std::move(r));
      }
    }
    write_study(opt_.artifacts / "c4_replicates.csv", all);
    return {wins >= 19, "IWMDE wins " + std::to_string(wins) + "/20 replicates (>= 19)"};
  }

  // 5. Bivariate surface accuracy and where its error concentrates.
  Verdict surface() {
    const auto t0 = Clock::now();
    const HyperPrior hyper = HyperPrior::uniform(Interval{0.0, 1.0}, Interval{0.0, 1.0});
    const InformedTTestModel model(suff(), hyper);
    const TTestOracle oracle(suff(), ConditionalPrior::normal_mean_sd());
    const Matrix grid = lattice(Interval{0.0, 1.0}, 41, Interval{0.05, 1.0}, 41);
    const CurveRun run =
        run_curve_experiment(model, oracle, {0.5, 0.5}, grid, {"iwmde"}, ChainConfig{}, QuadratureSpec{}, true);
    const SensitivityCurve& est = run.curves.front();
    write_to(opt_.artifacts / "c5_surface_exact.csv",
             [&](std::ostream& o) { write_curve_csv(o, run.oracle, model.gamma_names()); });
    write_to(opt_.artifacts / "c5_surface_iwmde.csv",
             [&](std::ostream& o) { write_curve_csv(o, est, model.gamma_names()); });

    std::vector<double> all;
    double in_sum = 0.0, out_sum = 0.0;
    std::size_t in_n = 0, out_n = 0;
    for (std::size_t i = 0; i < grid.rows(); ++i) {
      if (!est.ok(i)) continue;
      const double e = std::abs(est.log_bf[i] - run.oracle.log_bf[i]);
      all.push_back(e);
      if (grid(i, 0) > 0.5 && grid(i, 1) < 0.5) {
        in_sum += e;
        ++in_n;
      } else {
        out_sum += e;
        ++out_n;
      }
    }
    if (all.empty() || in_n == 0 || out_n == 0) return {false, "no usable cells in one of the regions"};
    const auto mid = all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2);
    std::nth_element(all.begin(), mid, all.end());
    double median = *mid;
    if (all.size() % 2 == 0) median = 0.5 * (median + *std::max_element(all.begin(), mid));
    const double in_mean = in_sum / static_cast<double>(in_n);
    const double out_mean = out_sum / static_cast<double>(out_n);
    const bool fast = since(t0) < 600.0;
    return {median <= 0.1 && in_mean >= out_mean && fast,
            "median |log ratio| = " + fmt(median, 4) + " (<= 0.1) over " + std::to_string(all.size()) +
                " cells; mean |error| mu > 0.5, sigma < 0.5: " + fmt(in_mean, 4) + " vs elsewhere " +
                fmt(out_mean, 4) + "; runtime " + (fast ? "< 10 min" : ">= 10 min")};
  }

  BmaSetup meta_setup() {
    BmaSetup s;
    s.data = read_meta_csv(fs::path(opt_.meta_data));
    s.tau_prior = HeterogeneityPrior{};
    s.hyper = HyperPrior::uniform(0.0, 2.0);
    s.sigma0 = 1.0;
    s.grid = default_grid(s.hyper, 100);
    s.validation_grid = default_validation_grid(s.hyper);
    return s;
  }

  // 6. Bridge and product-space inclusion curves agree with each other and
  // with the quadrature validation points.
  Verdict bma_agreement() {
    const auto t0 = Clock::now();
    const BmaSetup setup = meta_setup();
    const BmaRun run = run_bma_experiment(setup, BmaStrategy::Both, {"iwmde"}, ChainConfig{}, QuadratureSpec{}, true);
    const SensitivityCurve* bridge = nullptr;
    const SensitivityCurve* ps = nullptr;
    for (const auto& c : run.curves) (c.method.rfind("bridge:", 0) == 0 ? bridge : ps) = &c;
    const std::vector<std::string> names{"sigma_mu"};
    write_to(opt_.artifacts / "c6_inclusion_bridge.csv", [&](std::ostream& o) { write_curve_csv(o, *bridge, names); });
    write_to(opt_.artifacts / "c6_inclusion_product_space.csv",
             [&](std::ostream& o) { write_curve_csv(o, *ps, names); });

    double interior = 0.0;
    std::size_t compared = 0;
    for (std::size_t i = 0; i < setup.grid.rows(); ++i) {
      if (!bridge->ok(i) || !ps->ok(i) || !in_truncated_region(setup.hyper.bounds, setup.grid.row(i))) continue;
      interior = std::max(interior, std::abs(bridge->log_bf[i] - ps->log_bf[i]));
      ++compared;
    }
    double worst_validation = 0.0;
    bool all_valid = true;
    write_to(opt_.artifacts / "c6_validation.csv", [&](std::ostream& o) {
      o << "sigma_mu,exact_log_bf,bridge_log_ratio,product_space_log_ratio\n";
      for (std::size_t i = 0; i < run.validation.size(); ++i) {
        o << csv::format_double(run.validation.grid(i, 0)) << ',' << csv::format_double(run.validation.log_bf[i]);
        for (const auto& c : run.validation_curves) {
          const double r = c.ok(i) ? c.log_bf[i] - run.validation.log_bf[i] : NAN;
          if (std::isnan(r)) all_valid = false;
          else worst_validation = std::max(worst_validation, std::abs(r));
          o << ',' << csv::format_double(r);
        }
        o << '\n';
      }
    });
    const bool fast = since(t0) < 300.0;
    const bool pass = compared > 0 && interior <= 0.1 && all_valid && worst_validation <= 0.1 && fast;
    return {pass, "max interior |bridge - product-space| = " + fmt(interior, 4) + " (<= 0.1) over " +
                      std::to_string(compared) + " points; max |log ratio| at validation points = " +
                      fmt(worst_validation, 4) + (all_valid ? "" : " (some points without a value)") +
                      " (<= 0.1); runtime " + (fast ? "< 5 min" : ">= 5 min")};
  }

  // 7. Moving the anchor by e^eps moves every point by eps.
  Verdict anchor_shift() {
    const HyperPrior hyper = cauchy_hyper();
    const CauchyTTestModel model(suff(), hyper);
    ChainConfig cfg;
    cfg.n_keep = 2000;
    const PosteriorDraws draws = sample_extended(model, cfg);
    const DensityPtr dens = fit_density("iwmde", draws, model);
    const Matrix grid = default_grid(hyper, 100);
    const AnchorResult base = cauchy_oracle().anchor;
    const SensitivityCurve c0 = bf_curve(base, *dens, hyper, grid);
    double worst = 0.0;
    std::size_t checked = 0;
    for (double eps : {-2.5, -0.1, 1e-6, 0.7, 3.0}) {
      AnchorResult shifted = base;
      shifted.log_bf10 += eps;
      const SensitivityCurve c1 = bf_curve(shifted, *dens, hyper, grid);
      for (std::size_t i = 0; i < grid.rows(); ++i) {
        if (!c0.ok(i)) continue;
        // Exact up to the rounding of the two additions involved.
        const double tol = 4.0 * std::numeric_limits<double>::epsilon() *
                           std::max({1.0, std::abs(c0.log_bf[i]), std::abs(c1.log_bf[i])});
        worst = std::max(worst, std::abs((c1.log_bf[i] - c0.log_bf[i]) - eps) / tol);
        ++checked;
      }
    }
    return {checked > 0 && worst <= 1.0, "max |shift - eps| = " + fmt(worst, 3) + " x 4 ulp (<= 1) over " +
                                             std::to_string(checked) + " point-shifts"};
  }

  // 8. Anchor times the two density-ratio factors matches the direct BF at
  // the posterior median.
  Verdict sddr_chain() {
    const HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
    const ConjugateNormalModel model(kToyYbar, kToySigma, kToyN, hyper);
    const ConjugateOracle oracle(model);
    const double g0[1] = {kToyAnchor};
    const AnchorResult anchor = anchor_bf(oracle, hyper, g0, QuadratureSpec{});
    ChainConfig cfg;
    const PosteriorDraws draws = sample_extended(model, cfg);
    const DensityPtr dens = fit_density("iwmde", draws, model);
    const double gx[1] = {model.gamma_posterior_median()};
    const double f1 = anchor.log_bf10;
    const double f2 = std::log(dens->density(gx)) - hyper.logpdf(gx);
    const double f3 = hyper.logpdf(g0) - std::log(dens->density(g0));
    const double direct = model.log_marginal(gx[0]) - model.log_null_marginal();
    const double rel = std::abs(std::exp(f1 + f2 + f3 - direct) - 1.0);
    return {rel <= 0.05, "gamma_x = " + fmt(gx[0], 5) + "; BF(anchor) " + fmt(std::exp(f1), 5) + " x SDDR " +
                             fmt(std::exp(f2), 5) + " x SDDR^-1 " + fmt(std::exp(f3), 5) + " = " +
                             fmt(std::exp(f1 + f2 + f3), 5) + " vs direct " + fmt(std::exp(direct), 5) +
                             "; relative error " + fmt(rel, 3) + " (<= 0.05)"};
  }

  // 9. The curve collapses to log BF = 0 as the Cauchy scale shrinks.
  Verdict null_collapse() {
    const HyperPrior hyper = cauchy_hyper();
    const TTestOracle oracle(suff(), ConditionalPrior::cauchy_scale());
    const double r[1] = {1e-3};
    const double at = oracle.log_bf(r, QuadratureSpec{}).value;
    const CauchyTTestModel model(suff(), hyper);
    const CurveRun run = run_curve_experiment(model, oracle, {kAnchorR}, default_grid(hyper, 100), {"kde", "iwmde"},
                                              ChainConfig{}, QuadratureSpec{}, true);
    std::string trend;
    bool monotone = true;
    for (const auto& c : run.curves) {
      double prev = -1.0;
      std::size_t used = 0;
      bool ok = true;
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.grid(i, 0) >= 0.05 || !c.ok(i)) continue;
        const double v = std::abs(c.log_bf[i]);
        if (used > 0 && v < prev) ok = false;
        prev = v;
        ++used;
      }
      ok = ok && used >= 2;
      monotone = monotone && ok;
      trend += "; " + c.method + " " + (ok ? "monotone" : "not monotone") + " over " + std::to_string(used) + " points";
    }
    return {std::abs(at) <= 0.02 && monotone, "oracle log BF(0.001) = " + fmt(at, 4) + " (|.| <= 0.02)" + trend};
  }

  // 10. Two runs of the curve subcommand with the same seed produce identical
  // files. The full validate tree is compared by the acceptance binary.
  Verdict determinism() {
    std::vector<fs::path> dirs;
    for (const char* tag : {"c10_run_a", "c10_run_b"}) {
      const fs::path dir = opt_.artifacts / tag;
      fs::remove_all(dir);
      Json cfg = default_config("curve");
      cfg["data"] = opt_.ttest_data;
      cfg["grid"]["points"] = {50};
      cfg["chains"]["n_keep"] = 2000;
      cfg["estimators"] = {"kde", "iwmde"};
      cfg["force"] = true;
      cfg["out"] = dir.string();
      std::ostringstream log, err;
      if (run_subcommand("curve", cfg, log, err) != 0) return {false, "curve run failed: " + err.str()};
      dirs.push_back(dir);
    }
    auto diff = compare_trees(dirs[0], dirs[1], {"config.resolved.json"});
    auto strip_out = [](const fs::path& p) {
      std::ifstream in(p / "config.resolved.json");
      Json j = Json::parse(in);
      j.erase("out");
      return j.dump();
    };
    if (strip_out(dirs[0]) != strip_out(dirs[1])) diff.push_back("config.resolved.json");
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dirs[0])) files += e.is_regular_file();
    std::string list;
    for (const auto& d : diff) list += " " + d;
    return {diff.empty(), diff.empty() ? std::to_string(files) + " files byte-identical across two seeded curve runs"
                                       : "differing files:" + list};
  }

  // 11. One product-space fit plus curve evaluation against per-point oracle
  // refits on the same 10-point grid.
  Verdict speed_ordering() {
    const BmaSetup setup = meta_setup();
    const EnsembleSpec ens;
    const QuadratureSpec quad;

    const auto t0 = Clock::now();
    const SensitivityCurve exact =
        exact_inclusion_bf_curve(setup.data, setup.tau_prior, ens, setup.hyper, setup.validation_grid, quad, setup.sigma0);
    const double oracle_s = since(t0);

    const auto t1 = Clock::now();
    const BmaComponents anchors = bma_components(setup.data, setup.tau_prior, setup.sigma0, quad);
    const AnchorResult anchor{{setup.sigma0}, log_inclusion_bf(anchors, ens), "quadrature", anchors.est_error};
    ProductSpaceSpec ps;
    ps.p_fe = 0.5;
    ps.p_re = 0.5;
    const PosteriorDraws d = sample_product_space(ps, setup.data, setup.tau_prior, setup.hyper, ChainConfig{});
    const MetaAlternativeModel re(setup.data, setup.tau_prior, setup.hyper, MetaStructure::RandomEffects);
    const DensityPtr dens = fit_density("iwmde", d, re);
    const SensitivityCurve est = inclusion_bf_curve_product_space(anchor, d, *dens, setup.hyper, setup.validation_grid);
    const double fit_s = since(t1);

    (void)exact;
    (void)est;
    const double ratio = fit_s / oracle_s;
    log_ << "  oracle refits " << fmt(oracle_s, 3) << " s, extended fit " << fmt(fit_s, 3) << " s, ratio "
         << fmt(ratio, 3) << '\n';
    // Wall times vary between runs; only the verdict is reported.
    return {ratio <= 0.2, std::string("extended-fit path ") + (ratio <= 0.2 ? "within" : "exceeds") +
                              " 1/5 of the oracle-refit wall time on a 10-point grid"};
  }

  const AcceptanceOptions& opt_;
  std::ostream& log_;
  std::optional<TTestSufficient> suff_;
  std::optional<SensitivityCurve> cauchy_oracle_;
};

}  // namespace

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "exact-identity", "analytic gamma-posterior reproduces the closed-form curve (max |d| <= 1e-10, < 1 s)"},
      {2, "iwmde-accuracy", "IWMDE MAE_t <= 0.003 at 3,000 draws and <= 0.016 at 30,000 (< 2 min)"},
      {3, "kde-trend", "KDE MAE <= 0.5 at 3,000 and <= 0.1 at 300,000; MAE_t decreases; IWMDE below KDE (< 10 min)"},
      {4, "estimator-dominance", "IWMDE beats KDE in >= 19 of 20 seeds at 3,000 draws"},
      {5, "bivariate-surface", "41x41 informed t-test surface: median |log ratio| <= 0.1; error largest in the corner"},
      {6, "bma-agreement", "bridge and product-space inclusion curves agree within 0.1 and match validation points"},
      {7, "anchor-shift", "anchor times e^eps shifts every point by eps"},
      {8, "sddr-chain", "anchor x SDDR x SDDR^-1 within 5% of the direct BF at the posterior median"},
      {9, "null-collapse", "|log BF(0.001)| <= 0.02 and estimated curves approach 0 below r = 0.05"},
      {10, "determinism", "repeated seeded runs produce byte-identical outputs"},
      {11, "speed-ordering", "extended-fit path <= 1/5 the wall time of oracle refits on 10 points"},
  };
  return list;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream& log) {
  fs::create_directories(opt.artifacts);
  Suite suite(opt, log);
  std::vector<CriterionResult> out;
  for (int id : opt.criteria) {
    const auto it = std::find_if(criteria().begin(), criteria().end(), [&](const Criterion& c) { return c.id == id; });
    if (it == criteria().end()) throw ValidationError("unknown criterion " + std::to_string(id));
    CriterionResult r;
    r.id = id;
    r.name = it->name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Verdict v = suite.run(id);
      r.pass = v.pass;
      r.detail = v.detail;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << " " << r.name << ": " << r.detail << " ["
        << fmt(r.seconds, 3) << " s]\n";
    log.flush();
    out.push_back(std::move(r));
  }
  return out;
}

void write_report_csv(std::ostream& out, const std::vector<CriterionResult>& results) {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  out << "criterion,name,status,detail\n";
  for (const auto& r : results)
    out << r.id << ',' << r.name << ',' << (r.pass ? "pass" : "fail") << ',' << quote(r.detail) << '\n';
}

void write_report_json(std::ostream& out, const std::vector<CriterionResult>& results) {
  Json doc = Json::object();
  Json list = Json::array();
  bool all = true;
  for (const auto& r : results) {
    list.push_back({{"criterion", r.id}, {"name", r.name}, {"status", r.pass ? "pass" : "fail"}, {"detail", r.detail}});
    all = all && r.pass;
  }
  doc["criteria"] = list;
  doc["pass"] = all;
  out << doc.dump(2) << '\n';
}

std::vector<std::string> compare_trees(const fs::path& a, const fs::path& b, const std::vector<std::string>& ignore) {
  auto listing = [&](const fs::path& root) {
    std::vector<std::string> files;
    if (!fs::exists(root)) return files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      if (std::find(ignore.begin(), ignore.end(), e.path().filename().string()) != ignore.end()) continue;
      files.push_back(fs::relative(e.path(), root).generic_string());
    }
    std::sort(files.begin(), files.end());
    return files;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const auto fa = listing(a);
  const auto fb = listing(b);
  std::vector<std::string> diff;
  std::set_symmetric_difference(fa.begin(), fa.end(), fb.begin(), fb.end(), std::back_inserter(diff));
  for (const auto& f : fa)
    if (std::binary_search(fb.begin(), fb.end(), f) && slurp(a / f) != slurp(b / f)) diff.push_back(f);
  std::sort(diff.begin(), diff.end());
  return diff;
}

}  // namespace bfsens::app
