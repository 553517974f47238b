#include "experiments.hpp"

#include <algorithm>
#include <chrono>

#include "bfsens/error.hpp"

namespace bfsens::app {

bool is_estimator(const std::string& name) {
  return std::find(std::begin(kEstimatorNames), std::end(kEstimatorNames), name) != std::end(kEstimatorNames);
}

DensityPtr fit_density(const std::string& estimator, const PosteriorDraws& draws, const SensitivityModel& model) {
  const Box& support = model.hyper_prior().bounds;
  if (estimator == "kde") return kde_fit(draws.gamma, KdeSpec{}, support);
  if (estimator == "iwmde") return iwmde_fit(draws, model, IwmdeWeight::Uniform);
  if (estimator == "iwmde-conditional") return iwmde_fit(draws, model, IwmdeWeight::Conditional);
  if (estimator == "cmde") {
    if (support.size() != 1) throw ValidationError("cmde is one-dimensional");
    return cmde_ttest(draws, support[0]);
  }
  if (estimator == "trunc-normal") return trunc_normal_fit(draws.gamma, support);
  throw ValidationError("unknown estimator '" + estimator + "'");
}

SensitivityCurve estimate_curve(const std::string& estimator, const DensityEstimate& dens, const AnchorResult& anchor,
                                const HyperPrior& hyper, const Matrix& grid) {
  SensitivityCurve c = hyper.dim() == 2 ? bf_surface(anchor, dens, hyper, grid) : bf_curve(anchor, dens, hyper, grid);
  c.method = estimator;
  return c;
}

void check_draws(const PosteriorDraws& draws, bool force) {
  if (!force) require_converged(draws);
}

PosteriorDraws truncate_draws(const PosteriorDraws& draws, std::size_t n) {
  if (n >= draws.size()) return draws;
  const auto chains = static_cast<std::size_t>(draws.n_chains());
  std::vector<std::size_t> quota(chains, n / chains);
  for (std::size_t c = 0; c < n % chains; ++c) ++quota[c];
  PosteriorDraws out;
  out.gamma_names = draws.gamma_names;
  out.theta_names = draws.theta_names;
  out.gamma = Matrix(0, draws.gamma.cols());
  out.theta = Matrix(0, draws.theta.cols());
  if (draws.indicator) out.indicator.emplace();
  std::vector<std::size_t> taken(chains, 0);
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto c = static_cast<std::size_t>(draws.chain_id[i]);
    if (taken[c] == quota[c]) continue;
    ++taken[c];
    out.gamma.append_row(draws.gamma.row(i));
    out.theta.append_row(draws.theta.row(i));
    if (draws.indicator) out.indicator->push_back((*draws.indicator)[i]);
    out.chain_id.push_back(draws.chain_id[i]);
    out.iteration.push_back(draws.iteration[i]);
  }
  out.diagnostics = diagnostics(out);
  out.converged = diagnostics_pass(out.diagnostics);
  out.mixed = draws.mixed;
  return out;
}

CurveRun run_curve_experiment(const SensitivityModel& model, const ExactBayesFactor& oracle,
                              const std::vector<double>& gamma0, const Matrix& grid,
                              const std::vector<std::string>& estimators, const ChainConfig& chains,
                              const QuadratureSpec& quad, bool force) {
  CurveRun run;
  run.oracle = exact_bf_curve(oracle, model.hyper_prior(), grid, quad, gamma0);
  run.draws = sample_extended(model, chains);
  check_draws(run.draws, force);
  for (const auto& est : estimators) {
    const DensityPtr dens = fit_density(est, run.draws, model);
    run.curves.push_back(estimate_curve(est, *dens, run.oracle.anchor, model.hyper_prior(), grid));
  }
  return run;
}

std::vector<StudyRow> run_mcmc_study(const CauchyTTestModel& model, const SensitivityCurve& oracle,
                                     const std::vector<std::size_t>& draw_counts,
                                     const std::vector<std::string>& estimators, const ChainConfig& base,
                                     bool force) {
  std::vector<StudyRow> rows;
  for (std::size_t n : draw_counts) {
    ChainConfig cfg = base;
    const auto chains = static_cast<std::size_t>(cfg.n_chains);
    if (n < chains) throw ValidationError("draw count " + std::to_string(n) + " is below the chain count");
    cfg.n_keep = static_cast<int>((n + chains - 1) / chains);
    const auto t0 = std::chrono::steady_clock::now();
    const PosteriorDraws draws = truncate_draws(sample_extended(model, cfg), n);
    const double sample_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    check_draws(draws, force);
    for (const auto& est : estimators) {
      const auto t1 = std::chrono::steady_clock::now();
      const DensityPtr dens = fit_density(est, draws, model);
      StudyRow row;
      row.curve = estimate_curve(est, *dens, oracle.anchor, model.hyper_prior(), oracle.grid);
      row.n = n;
      row.method = est;
      row.error = curve_error_report(row.curve, oracle);
      row.converged = draws.converged;
      row.seconds = sample_seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

BmaStrategy parse_bma_strategy(const std::string& name) {
  if (name == "bridge") return BmaStrategy::Bridge;
  if (name == "product-space") return BmaStrategy::ProductSpace;
  if (name == "both") return BmaStrategy::Both;
  throw ValidationError("unknown strategy '" + name + "' (expected bridge, product-space or both)");
}

std::string to_string(BmaStrategy s) {
  switch (s) {
    case BmaStrategy::Bridge:
      return "bridge";
    case BmaStrategy::ProductSpace:
      return "product-space";
    case BmaStrategy::Both:
      return "both";
  }
  return "?";
}

Matrix default_validation_grid(const HyperPrior& hyper) {
  const Interval s = hyper.bounds[0];
  Matrix g(10, 1);
  for (std::size_t k = 0; k < 10; ++k) g(k, 0) = s.lower + s.width() * static_cast<double>(k + 1) / 10.0;
  return g;
}

BmaRun run_bma_experiment(const BmaSetup& setup, BmaStrategy strategy, const std::vector<std::string>& estimators,
                          const ChainConfig& chains, const QuadratureSpec& quad, bool force) {
  setup.ensemble.validate();
  BmaRun run;
  run.anchors = bma_components(setup.data, setup.tau_prior, setup.sigma0, quad);
  run.anchor_log_bf_incl = log_inclusion_bf(run.anchors, setup.ensemble);
  run.validation = exact_inclusion_bf_curve(setup.data, setup.tau_prior, setup.ensemble, setup.hyper,
                                            setup.validation_grid, quad, setup.sigma0);

  const MetaAlternativeModel fe(setup.data, setup.tau_prior, setup.hyper, MetaStructure::FixedEffect);
  const MetaAlternativeModel re(setup.data, setup.tau_prior, setup.hyper, MetaStructure::RandomEffects);

  auto tag = [](SensitivityCurve c, const std::string& strat, const std::string& est) {
    c.method = strat + ":" + est;
    return c;
  };

  if (strategy != BmaStrategy::ProductSpace) {
    ChainConfig cfg_fe = chains;
    ChainConfig cfg_re = chains;
    cfg_re.seed = chains.seed + 1;
    const PosteriorDraws d_fe = sample_extended(fe, cfg_fe);
    const PosteriorDraws d_re = sample_extended(re, cfg_re);
    check_draws(d_fe, force);
    check_draws(d_re, force);
    for (const auto& est : estimators) {
      const DensityPtr dfe = fit_density(est, d_fe, fe);
      const DensityPtr dre = fit_density(est, d_re, re);
      run.curves.push_back(tag(inclusion_bf_curve_bridge(run.anchors, setup.sigma0, *dfe, *dre, setup.hyper,
                                                         setup.ensemble, setup.grid),
                               "bridge", est));
      run.validation_curves.push_back(tag(inclusion_bf_curve_bridge(run.anchors, setup.sigma0, *dfe, *dre,
                                                                    setup.hyper, setup.ensemble,
                                                                    setup.validation_grid),
                                          "bridge", est));
    }
  }

  if (strategy != BmaStrategy::Bridge) {
    ChainConfig cfg = chains;
    cfg.seed = chains.seed + 2;
    ProductSpaceSpec ps;
    const double p_alt = setup.ensemble.p_fe_alt + setup.ensemble.p_re_alt;
    ps.p_fe = setup.ensemble.p_fe_alt / p_alt;
    ps.p_re = setup.ensemble.p_re_alt / p_alt;
    const PosteriorDraws d = sample_product_space(ps, setup.data, setup.tau_prior, setup.hyper, cfg, &run.pseudo_prior);
    check_draws(d, force);
    std::size_t n_re = 0;
    for (int z : *d.indicator) n_re += z == 1;
    run.product_space_p_re = static_cast<double>(n_re) / static_cast<double>(d.size());
    const AnchorResult anchor{{setup.sigma0}, run.anchor_log_bf_incl, "quadrature", run.anchors.est_error};
    for (const auto& est : estimators) {
      if (est == "cmde") throw ValidationError("cmde applies to the Cauchy t-test only");
      // Pooled draws carry (mu, tau) in both states; the tau prior term is
      // free of sigma_mu and cancels in every IWMDE ratio.
      const DensityPtr dens = fit_density(est, d, re);
      run.curves.push_back(
          tag(inclusion_bf_curve_product_space(anchor, d, *dens, setup.hyper, setup.grid), "product-space", est));
      run.validation_curves.push_back(tag(
          inclusion_bf_curve_product_space(anchor, d, *dens, setup.hyper, setup.validation_grid), "product-space", est));
    }
  }
  return run;
}

}  // namespace bfsens::app
