#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "acceptance.hpp"
#include "bfsens/csv.hpp"
#include "bfsens/datasets.hpp"
#include "bfsens/error.hpp"
#include "experiments.hpp"
#include "svg.hpp"

#ifndef BFSENS_DATA_DIR
#define BFSENS_DATA_DIR "data"
#endif

namespace bfsens::app {

namespace fs = std::filesystem;

namespace {

const std::string kDataDir = BFSENS_DATA_DIR;

Json chains_default(int n_keep) {
  const ChainConfig c;
  return {{"n_chains", c.n_chains},         {"n_warmup", c.n_warmup},
          {"n_keep", n_keep},               {"thin", c.thin},
          {"seed", c.seed},                 {"target_accept", c.target_accept},
          {"adapt_window", c.adapt_window}, {"gamma_substeps", c.gamma_substeps}};
}

Json quadrature_default() {
  const QuadratureSpec q;
  return {{"method", to_string(q.method)}, {"abs_tol", q.abs_tol}, {"rel_tol", q.rel_tol}, {"max_depth", q.max_depth}};
}

// --- config readers -------------------------------------------------------------

ChainConfig chain_config(const Json& j) {
  ChainConfig c;
  c.n_chains = j.at("n_chains").get<int>();
  c.n_warmup = j.at("n_warmup").get<int>();
  c.n_keep = j.at("n_keep").get<int>();
  c.thin = j.at("thin").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.target_accept = j.at("target_accept").get<double>();
  c.adapt_window = j.at("adapt_window").get<int>();
  c.gamma_substeps = j.at("gamma_substeps").get<int>();
  c.validate();
  return c;
}

QuadratureSpec quadrature_spec(const Json& j) {
  QuadratureSpec q;
  q.method = parse_quadrature_method(j.at("method").get<std::string>());
  q.abs_tol = j.at("abs_tol").get<double>();
  q.rel_tol = j.at("rel_tol").get<double>();
  q.max_depth = j.at("max_depth").get<int>();
  q.validate();
  return q;
}

HyperPrior hyper_prior(const Json& j) {
  const auto lo = j.at("lower").get<std::vector<double>>();
  const auto hi = j.at("upper").get<std::vector<double>>();
  if (lo.size() != hi.size() || lo.empty() || lo.size() > 2)
    throw ValidationError("hyper: lower and upper must both have one or two entries");
  HyperPrior h = lo.size() == 1 ? HyperPrior::uniform(lo[0], hi[0])
                                : HyperPrior::uniform(Interval{lo[0], hi[0]}, Interval{lo[1], hi[1]});
  h.validate();
  return h;
}

// {"points": [n]} uses the default clamped grid; explicit "lower"/"upper"
// give an equispaced grid or lattice over that box.
Matrix grid_from(const Json& j, const HyperPrior& hyper) {
  const auto pts = j.at("points").get<std::vector<std::size_t>>();
  if (pts.size() != hyper.dim()) throw ValidationError("grid: one point count per hyper-parameter is required");
  for (auto n : pts)
    if (n < 2) throw ValidationError("grid: at least two points per dimension");
  const bool explicit_box = j.contains("lower") && !j.at("lower").is_null();
  if (hyper.dim() == 1) {
    if (!explicit_box) return default_grid(hyper, pts[0]);
    return linear_grid(j.at("lower")[0].get<double>(), j.at("upper")[0].get<double>(), pts[0]);
  }
  Interval a = hyper.bounds[0], b = hyper.bounds[1];
  if (explicit_box) {
    a = {j.at("lower")[0].get<double>(), j.at("upper")[0].get<double>()};
    b = {j.at("lower")[1].get<double>(), j.at("upper")[1].get<double>()};
  }
  return lattice(a, pts[0], b, pts[1]);
}

std::vector<std::string> estimator_list(const Json& j) {
  auto v = j.get<std::vector<std::string>>();
  if (v.empty()) throw ValidationError("estimators: the list must not be empty");
  for (const auto& e : v)
    if (!is_estimator(e)) throw ValidationError("estimators: unknown estimator '" + e + "'");
  return v;
}

HeterogeneityPrior tau_prior(const Json& j) {
  HeterogeneityPrior p{j.at("shape").get<double>(), j.at("scale").get<double>()};
  p.validate();
  return p;
}

// --- output helpers --------------------------------------------------------------

fs::path prepare_out(const Json& cfg) {
  const fs::path out = cfg.at("out").get<std::string>();
  fs::create_directories(out);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << text;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  fn(f);
}

void echo_config(const fs::path& out, const std::string& subcommand, const Json& cfg) {
  Json doc = cfg;
  doc["subcommand"] = subcommand;
  write_text(out / "config.resolved.json", doc.dump(2) + "\n");
}

Json anchor_json(const AnchorResult& a, const SensitivityCurve& exact_or_est) {
  Json j = {{"gamma0", a.gamma0},
            {"log_bf10", a.log_bf10},
            {"method", a.method},
            {"est_error", a.est_error},
            {"nearest_node", exact_or_est.anchor_node}};
  std::vector<double> node;
  for (double v : exact_or_est.grid.row(exact_or_est.anchor_node)) node.push_back(v);
  j["nearest_node_gamma"] = node;
  return j;
}

void write_errors(const fs::path& path, const std::vector<SensitivityCurve>& curves, const SensitivityCurve& exact) {
  write_file(path, [&](std::ostream& o) {
    o << "method,MAE,RMSE,MAE_t,RMSE_t,max_abs,n_points,n_truncated\n";
    for (const auto& c : curves) {
      const ErrorReport r = curve_error_report(c, exact);
      o << c.method << ',' << csv::format_double(r.mae) << ',' << csv::format_double(r.rmse) << ','
        << csv::format_double(r.mae_t) << ',' << csv::format_double(r.rmse_t) << ','
        << csv::format_double(r.max_abs) << ',' << r.n_points << ',' << r.n_truncated << '\n';
    }
  });
}

void write_diagnostics(const fs::path& path, const PosteriorDraws& d) {
  write_file(path, [&](std::ostream& o) {
    o << "parameter,rhat,ess,degenerate\n";
    for (const auto& p : d.diagnostics)
      o << p.name << ',' << csv::format_double(p.rhat) << ',' << csv::format_double(p.ess) << ','
        << (p.degenerate ? 1 : 0) << '\n';
  });
}

std::vector<double> column_of(const Matrix& m, std::size_t c) { return m.column(c); }

std::vector<double> log_ratio(const SensitivityCurve& c, const SensitivityCurve& exact) {
  std::vector<double> r(c.size(), NAN);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.ok(i) && exact.ok(i)) r[i] = c.log_bf[i] - exact.log_bf[i];
  return r;
}

// --- models from config ------------------------------------------------------------

struct OneDimSetup {
  std::unique_ptr<SensitivityModel> model;
  std::unique_ptr<ExactBayesFactor> oracle;
  std::string gamma_name;
};

OneDimSetup one_dim_setup(const Json& cfg) {
  const std::string kind = cfg.at("model").get<std::string>();
  const HyperPrior hyper = hyper_prior(cfg.at("hyper"));
  if (hyper.dim() != 1) throw ValidationError("curve: the hyper-prior must be one-dimensional");
  OneDimSetup s;
  if (kind == "ttest-cauchy") {
    const TTestSufficient suff = ttest_sufficient(read_ttest_json(cfg.at("data").get<std::string>()));
    s.model = std::make_unique<CauchyTTestModel>(suff, hyper);
    s.oracle = std::make_unique<TTestOracle>(suff, ConditionalPrior::cauchy_scale());
    s.gamma_name = "r";
  } else if (kind == "meta-fe" || kind == "meta-re") {
    const MetaData data = read_meta_csv(fs::path(cfg.at("data").get<std::string>()));
    const HeterogeneityPrior tp = tau_prior(cfg.at("tau_prior"));
    const bool re = kind == "meta-re";
    s.model = std::make_unique<MetaAlternativeModel>(data, tp, hyper,
                                                     re ? MetaStructure::RandomEffects : MetaStructure::FixedEffect);
    s.oracle = std::make_unique<MetaComponentOracle>(data, re ? std::optional{tp} : std::nullopt);
    s.gamma_name = "sigma_mu";
  } else {
    throw ValidationError("curve: unknown model '" + kind + "' (expected ttest-cauchy, meta-fe or meta-re)");
  }
  return s;
}

// --- subcommands ---------------------------------------------------------------------

int cmd_curve(const Json& cfg, std::ostream& log) {
  const OneDimSetup s = one_dim_setup(cfg);
  const HyperPrior& hyper = s.model->hyper_prior();
  const Matrix grid = grid_from(cfg.at("grid"), hyper);
  const auto estimators = estimator_list(cfg.at("estimators"));
  const auto gamma0 = cfg.at("anchor").get<std::vector<double>>();
  const ChainConfig chains = chain_config(cfg.at("chains"));
  const QuadratureSpec quad = quadrature_spec(cfg.at("quadrature"));
  const fs::path out = prepare_out(cfg);
  echo_config(out, "curve", cfg);

  log << "curve: " << s.model->name() << ", " << grid.rows() << " grid points, "
      << chains.n_chains * chains.n_keep << " draws\n";
  const CurveRun run = run_curve_experiment(*s.model, *s.oracle, gamma0, grid, estimators, chains, quad,
                                            cfg.at("force").get<bool>());
  const std::vector<std::string> names{s.gamma_name};

  write_text(out / "anchor.json", anchor_json(run.oracle.anchor, run.oracle).dump(2) + "\n");
  write_file(out / "draws.csv", [&](std::ostream& o) { write_draws_csv(o, run.draws); });
  write_diagnostics(out / "diagnostics.csv", run.draws);
  write_file(out / "curve_exact.csv", [&](std::ostream& o) { write_curve_csv(o, run.oracle, names); });
  for (const auto& c : run.curves)
    write_file(out / ("curve_" + c.method + ".csv"), [&](std::ostream& o) { write_curve_csv(o, c, names); });
  write_errors(out / "errors.csv", run.curves, run.oracle);

  svg::Figure fig(2);
  svg::LinePanel bf{"log BF10", s.gamma_name, "log BF10", {}, {}, {}, {}};
  svg::LinePanel ratio{"approximation ratio (log)", s.gamma_name, "log(BF approx / BF exact)", {}, {}, {}, 0.0};
  const auto x = column_of(grid, 0);
  bf.series.push_back({"exact", x, run.oracle.log_bf, svg::color_for("exact"), true});
  for (const auto& c : run.curves) {
    bf.series.push_back({c.method, x, c.log_bf, svg::color_for(c.method), false});
    ratio.series.push_back({c.method, x, log_ratio(c, run.oracle), svg::color_for(c.method), false});
  }
  bf.anchor = svg::Point{gamma0[0], run.oracle.anchor.log_bf10};
  fig.add(std::move(bf));
  fig.add(std::move(ratio));
  write_text(out / "curve.svg", fig.render());

  for (const auto& c : run.curves) {
    const ErrorReport r = curve_error_report(c, run.oracle);
    log << "  " << c.method << ": MAE " << r.mae << ", MAE_t " << r.mae_t << '\n';
  }
  return 0;
}

int cmd_surface(const Json& cfg, std::ostream& log) {
  const std::string kind = cfg.at("model").get<std::string>();
  if (kind != "ttest-informed") throw ValidationError("surface: unknown model '" + kind + "' (expected ttest-informed)");
  const HyperPrior hyper = hyper_prior(cfg.at("hyper"));
  if (hyper.dim() != 2) throw ValidationError("surface: the hyper-prior must be two-dimensional");
  const TTestSufficient suff = ttest_sufficient(read_ttest_json(cfg.at("data").get<std::string>()));
  const InformedTTestModel model(suff, hyper);
  const TTestOracle oracle(suff, ConditionalPrior::normal_mean_sd());
  const Matrix grid = grid_from(cfg.at("grid"), hyper);
  const auto pts = cfg.at("grid").at("points").get<std::vector<std::size_t>>();
  const auto estimators = estimator_list(cfg.at("estimators"));
  const auto gamma0 = cfg.at("anchor").get<std::vector<double>>();
  const ChainConfig chains = chain_config(cfg.at("chains"));
  const QuadratureSpec quad = quadrature_spec(cfg.at("quadrature"));
  const fs::path out = prepare_out(cfg);
  echo_config(out, "surface", cfg);

  log << "surface: " << pts[0] << "x" << pts[1] << " lattice, " << chains.n_chains * chains.n_keep << " draws\n";
  const CurveRun run = run_curve_experiment(model, oracle, gamma0, grid, estimators, chains, quad,
                                            cfg.at("force").get<bool>());
  const std::vector<std::string> names = model.gamma_names();
  write_text(out / "anchor.json", anchor_json(run.oracle.anchor, run.oracle).dump(2) + "\n");
  write_file(out / "draws.csv", [&](std::ostream& o) { write_draws_csv(o, run.draws); });
  write_diagnostics(out / "diagnostics.csv", run.draws);
  write_file(out / "surface_exact.csv", [&](std::ostream& o) { write_curve_csv(o, run.oracle, names); });
  for (const auto& c : run.curves)
    write_file(out / ("surface_" + c.method + ".csv"), [&](std::ostream& o) { write_curve_csv(o, c, names); });
  write_errors(out / "errors.csv", run.curves, run.oracle);

  const double x0 = grid(0, 0), x1 = grid(grid.rows() - 1, 0);
  const double y0 = grid(0, 1), y1 = grid(grid.rows() - 1, 1);
  auto heat = [&](std::string title, std::vector<double> v, bool div) {
    svg::HeatPanel p;
    p.title = std::move(title);
    p.x_label = names[0];
    p.y_label = names[1];
    p.nx = pts[0];
    p.ny = pts[1];
    p.x0 = x0, p.x1 = x1, p.y0 = y0, p.y1 = y1;
    p.values = std::move(v);
    p.diverging = div;
    return p;
  };
  svg::Figure fig(1 + run.curves.size());
  fig.add(heat("exact log BF10", run.oracle.log_bf, false));
  for (const auto& c : run.curves) {
    auto p = heat(c.method + " log BF10", c.log_bf, false);
    p.anchor = svg::Point{gamma0[0], gamma0[1]};
    fig.add(std::move(p));
  }
  fig.skip();
  for (const auto& c : run.curves) {
    auto p = heat(c.method + " log approximation ratio", log_ratio(c, run.oracle), true);
    p.anchor = svg::Point{gamma0[0], gamma0[1]};
    fig.add(std::move(p));
  }
  write_text(out / "surface.svg", fig.render());
  return 0;
}

int cmd_mcmc_study(const Json& cfg, std::ostream& log) {
  const HyperPrior hyper = hyper_prior(cfg.at("hyper"));
  if (cfg.at("model").get<std::string>() != "ttest-cauchy")
    throw ValidationError("mcmc-study: only the ttest-cauchy model is supported");
  const TTestSufficient suff = ttest_sufficient(read_ttest_json(cfg.at("data").get<std::string>()));
  const CauchyTTestModel model(suff, hyper);
  const TTestOracle oracle(suff, ConditionalPrior::cauchy_scale());
  const Matrix grid = grid_from(cfg.at("grid"), hyper);
  const auto estimators = estimator_list(cfg.at("estimators"));
  const auto gamma0 = cfg.at("anchor").get<std::vector<double>>();
  const auto counts = cfg.at("draw_counts").get<std::vector<std::size_t>>();
  if (counts.empty()) throw ValidationError("mcmc-study: draw_counts must not be empty");
  const ChainConfig chains = chain_config(cfg.at("chains"));
  const QuadratureSpec quad = quadrature_spec(cfg.at("quadrature"));
  const fs::path out = prepare_out(cfg);
  echo_config(out, "mcmc-study", cfg);

  const SensitivityCurve exact = exact_bf_curve(oracle, hyper, grid, quad, gamma0);
  const auto rows = run_mcmc_study(model, exact, counts, estimators, chains, cfg.at("force").get<bool>());
  write_file(out / "study.csv", [&](std::ostream& o) {
    o << "n,method,MAE,RMSE,MAE_t,RMSE_t,converged\n";
    for (const auto& r : rows)
      o << r.n << ',' << r.method << ',' << csv::format_double(r.error.mae) << ',' << csv::format_double(r.error.rmse)
        << ',' << csv::format_double(r.error.mae_t) << ',' << csv::format_double(r.error.rmse_t) << ','
        << (r.converged ? 1 : 0) << '\n';
  });

  svg::Figure fig(estimators.size());
  const auto x = column_of(grid, 0);
  for (const auto& est : estimators) {
    svg::LinePanel p{est + " approximation ratio (log)", "r", "log(BF approx / BF exact)", {}, {}, {}, 0.0};
    static const char* shades[] = {"#fdae61", "#f46d43", "#d73027", "#a50026", "#4d0015",
                                   "#74add1", "#4575b4", "#313695"};
    std::size_t k = 0;
    for (const auto& r : rows)
      if (r.method == est)
        p.series.push_back({"n=" + std::to_string(r.n), x, log_ratio(r.curve, exact), shades[k++ % 8], false});
    fig.add(std::move(p));
  }
  write_text(out / "study.svg", fig.render());
  for (const auto& r : rows) log << "  n=" << r.n << ' ' << r.method << ": MAE_t " << r.error.mae_t << '\n';
  return 0;
}

BmaSetup bma_setup(const Json& cfg) {
  BmaSetup s;
  s.data = read_meta_csv(fs::path(cfg.at("data").get<std::string>()));
  s.tau_prior = tau_prior(cfg.at("tau_prior"));
  const Json& e = cfg.at("ensemble");
  s.ensemble = {e.at("p_fe_null").get<double>(), e.at("p_re_null").get<double>(), e.at("p_fe_alt").get<double>(),
                e.at("p_re_alt").get<double>()};
  s.ensemble.validate();
  s.hyper = hyper_prior(cfg.at("hyper"));
  if (s.hyper.dim() != 1) throw ValidationError("bma: the hyper-prior must be one-dimensional");
  s.sigma0 = cfg.at("anchor").get<std::vector<double>>().at(0);
  s.grid = grid_from(cfg.at("grid"), s.hyper);
  const Json& v = cfg.at("validation_grid");
  s.validation_grid = v.is_null() ? default_validation_grid(s.hyper)
                                  : Matrix::from_column(v.get<std::vector<double>>());
  return s;
}

int cmd_bma(const Json& cfg, std::ostream& log) {
  const BmaSetup setup = bma_setup(cfg);
  const BmaStrategy strategy = parse_bma_strategy(cfg.at("strategy").get<std::string>());
  const auto estimators = estimator_list(cfg.at("estimators"));
  const ChainConfig chains = chain_config(cfg.at("chains"));
  const QuadratureSpec quad = quadrature_spec(cfg.at("quadrature"));
  const fs::path out = prepare_out(cfg);
  echo_config(out, "bma", cfg);

  log << "bma: K = " << setup.data.size() << ", strategy " << to_string(strategy) << '\n';
  const BmaRun run = run_bma_experiment(setup, strategy, estimators, chains, quad, cfg.at("force").get<bool>());
  const std::vector<std::string> names{"sigma_mu"};

  Json anchor = {{"sigma0", setup.sigma0},
                 {"log_bf_incl", run.anchor_log_bf_incl},
                 {"log_bf_fe_alt", run.anchors.log_bf_fe_alt},
                 {"log_bf_re_alt", run.anchors.log_bf_re_alt},
                 {"log_bf_re_null", run.anchors.log_bf_re_null},
                 {"log_bf_fe_null", run.anchors.log_bf_fe_null},
                 {"est_error", run.anchors.est_error}};
  if (strategy != BmaStrategy::Bridge) {
    anchor["pseudo_prior"] = {{"shape", run.pseudo_prior.shape}, {"scale", run.pseudo_prior.scale}};
    anchor["product_space_p_re"] = run.product_space_p_re;
  }
  write_text(out / "anchor.json", anchor.dump(2) + "\n");

  for (const auto& c : run.curves) {
    std::string file = "inclusion_" + c.method + ".csv";
    std::replace(file.begin(), file.end(), ':', '_');
    write_file(out / file, [&](std::ostream& o) { write_curve_csv(o, c, names); });
  }
  write_file(out / "validation.csv", [&](std::ostream& o) {
    o << "sigma_mu,exact_log_bf";
    for (const auto& c : run.validation_curves) o << ',' << c.method << "_log_bf," << c.method << "_log_ratio";
    o << '\n';
    for (std::size_t i = 0; i < run.validation.size(); ++i) {
      o << csv::format_double(run.validation.grid(i, 0)) << ',' << csv::format_double(run.validation.log_bf[i]);
      for (const auto& c : run.validation_curves) {
        const double lb = c.ok(i) ? c.log_bf[i] : NAN;
        o << ',' << csv::format_double(lb) << ',' << csv::format_double(lb - run.validation.log_bf[i]);
      }
      o << '\n';
    }
  });

  // One row per strategy: curve with validation crosses, ratio at the crosses.
  svg::Figure fig(2);
  const auto x = column_of(setup.grid, 0);
  const auto vx = column_of(setup.validation_grid, 0);
  for (const char* strat : {"bridge", "product-space"}) {
    svg::LinePanel p{std::string(strat) + ": log BF_incl", "sigma_mu", "log BF_incl", {}, {}, {}, {}};
    svg::LinePanel r{std::string(strat) + ": approximation ratio (log)", "sigma_mu", "log(BF approx / BF exact)",
                     {}, {}, {}, 0.0};
    bool any = false;
    for (std::size_t k = 0; k < run.curves.size(); ++k) {
      const auto& c = run.curves[k];
      if (c.method.rfind(std::string(strat) + ":", 0) != 0) continue;
      any = true;
      const std::string est = c.method.substr(c.method.find(':') + 1);
      p.series.push_back({est, x, c.log_bf, svg::color_for(est), false});
      r.series.push_back({est, vx, log_ratio(run.validation_curves[k], run.validation), svg::color_for(est), false});
    }
    if (!any) continue;
    for (std::size_t i = 0; i < run.validation.size(); ++i) p.crosses.push_back({vx[i], run.validation.log_bf[i]});
    p.anchor = svg::Point{setup.sigma0, run.anchor_log_bf_incl};
    fig.add(std::move(p));
    fig.add(std::move(r));
  }
  write_text(out / "bma.svg", fig.render());
  log << "  anchor log BF_incl " << run.anchor_log_bf_incl << '\n';
  return 0;
}

int cmd_gen_meta(const Json& cfg, std::ostream& log) {
  SyntheticMetaSpec spec;
  spec.k = cfg.at("k").get<int>();
  spec.mu = cfg.at("mu").get<double>();
  spec.tau = cfg.at("tau").get<double>();
  spec.se_range = {cfg.at("se_lower").get<double>(), cfg.at("se_upper").get<double>()};
  spec.seed = cfg.at("seed").get<std::uint64_t>();
  const MetaData d = gen_synthetic_meta(spec);
  const fs::path out = prepare_out(cfg);
  echo_config(out, "gen-meta", cfg);
  write_file(out / cfg.at("file").get<std::string>(), [&](std::ostream& o) { write_meta_csv(o, d); });
  log << "gen-meta: wrote " << d.size() << " studies to " << (out / cfg.at("file").get<std::string>()).string()
      << '\n';
  return 0;
}

int cmd_validate(const Json& cfg, std::ostream& log) {
  const fs::path out = prepare_out(cfg);
  echo_config(out, "validate", cfg);
  AcceptanceOptions opt;
  opt.ttest_data = cfg.at("ttest_data").get<std::string>();
  opt.meta_data = cfg.at("meta_data").get<std::string>();
  opt.artifacts = out / "artifacts";
  opt.criteria = cfg.at("criteria").get<std::vector<int>>();
  const auto results = run_acceptance(opt, log);
  write_file(out / "validation_report.csv", [&](std::ostream& o) { write_report_csv(o, results); });
  write_file(out / "validation_report.json", [&](std::ostream& o) { write_report_json(o, results); });
  bool ok = true;
  for (const auto& r : results) ok = ok && r.pass;
  return ok ? 0 : 1;
}

void check_keys(const Json& defaults, const Json& user, const std::string& where) {
  if (!user.is_object()) throw ValidationError("config: '" + where + "' must be a JSON object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (!defaults.contains(it.key())) throw ValidationError("config: unknown key '" + where + it.key() + "'");
    const Json& d = defaults.at(it.key());
    if (d.is_object() && !it->is_null()) check_keys(d, *it, where + it.key() + ".");
  }
}

}  // namespace

Json default_config(const std::string& subcommand) {
  const std::string oosterwijk = kDataDir + "/oosterwijk.json";
  const std::string meta = kDataDir + "/synthetic_meta_k9.csv";
  const Json quad = quadrature_default();
  if (subcommand == "curve")
    return {{"model", "ttest-cauchy"},
            {"data", oosterwijk},
            {"tau_prior", {{"shape", 1.0}, {"scale", 0.15}}},
            {"hyper", {{"lower", {0.0}}, {"upper", {2.0}}}},
            {"anchor", {std::sqrt(2.0) / 2.0}},
            {"estimators", {"kde", "iwmde"}},
            {"grid", {{"points", {100}}, {"lower", nullptr}, {"upper", nullptr}}},
            {"chains", chains_default(10000)},
            {"quadrature", quad},
            {"force", false},
            {"out", "out/curve"}};
  if (subcommand == "surface")
    return {{"model", "ttest-informed"},
            {"data", oosterwijk},
            {"hyper", {{"lower", {0.0, 0.0}}, {"upper", {1.0, 1.0}}}},
            {"anchor", {0.5, 0.5}},
            {"estimators", {"kde", "iwmde"}},
            {"grid", {{"points", {41, 41}}, {"lower", {0.0, 0.05}}, {"upper", {1.0, 1.0}}}},
            {"chains", chains_default(10000)},
            {"quadrature", quad},
            {"force", false},
            {"out", "out/surface"}};
  if (subcommand == "mcmc-study")
    return {{"model", "ttest-cauchy"},
            {"data", oosterwijk},
            {"hyper", {{"lower", {0.0}}, {"upper", {2.0}}}},
            {"anchor", {std::sqrt(2.0) / 2.0}},
            {"estimators", {"kde", "iwmde"}},
            {"draw_counts", {3000, 10000, 30000, 100000, 300000}},
            {"grid", {{"points", {100}}, {"lower", nullptr}, {"upper", nullptr}}},
            {"chains", chains_default(10000)},
            {"quadrature", quad},
            {"force", false},
            {"out", "out/mcmc-study"}};
  if (subcommand == "bma")
    return {{"data", meta},
            {"tau_prior", {{"shape", 1.0}, {"scale", 0.15}}},
            {"ensemble", {{"p_fe_null", 0.25}, {"p_re_null", 0.25}, {"p_fe_alt", 0.25}, {"p_re_alt", 0.25}}},
            {"hyper", {{"lower", {0.0}}, {"upper", {2.0}}}},
            {"anchor", {1.0}},
            {"strategy", "both"},
            {"estimators", {"kde", "iwmde"}},
            {"grid", {{"points", {100}}, {"lower", nullptr}, {"upper", nullptr}}},
            {"validation_grid", nullptr},
            {"chains", chains_default(10000)},
            {"quadrature", quad},
            {"force", false},
            {"out", "out/bma"}};
  if (subcommand == "gen-meta") {
    const SyntheticMetaSpec s;
    return {{"k", s.k},
            {"mu", s.mu},
            {"tau", s.tau},
            {"se_lower", s.se_range.lower},
            {"se_upper", s.se_range.upper},
            {"seed", s.seed},
            {"file", "synthetic_meta.csv"},
            {"out", "out/gen-meta"}};
  }
  if (subcommand == "validate") {
    std::vector<int> all;
    for (const auto& c : criteria()) all.push_back(c.id);
    return {{"ttest_data", oosterwijk}, {"meta_data", meta}, {"criteria", all}, {"out", "out/validate"}};
  }
  throw ValidationError("unknown subcommand '" + subcommand + "'");
}

Json resolve_config(const std::string& subcommand, const std::optional<fs::path>& file, const Overrides& ov) {
  Json cfg = default_config(subcommand);
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ValidationError("cannot open config " + file->string());
    Json user;
    try {
      user = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ValidationError("config " + file->string() + ": " + e.what());
    }
    check_keys(cfg, user, "");
    cfg.merge_patch(user);
  }
  if (ov.seed) {
    if (cfg.contains("chains")) cfg["chains"]["seed"] = *ov.seed;
    else if (cfg.contains("seed")) cfg["seed"] = *ov.seed;
    else throw ValidationError(subcommand + " does not take --seed");
  }
  if (ov.out) cfg["out"] = *ov.out;
  if (ov.estimators) {
    if (!cfg.contains("estimators")) throw ValidationError(subcommand + " does not take --estimators");
    cfg["estimators"] = *ov.estimators;
  }
  if (ov.strategy) {
    if (!cfg.contains("strategy")) throw ValidationError(subcommand + " does not take --strategy");
    cfg["strategy"] = *ov.strategy;
  }
  if (ov.force) {
    if (!cfg.contains("force")) throw ValidationError(subcommand + " does not take --force");
    cfg["force"] = true;
  }
  return cfg;
}

int run_subcommand(const std::string& subcommand, const Json& cfg, std::ostream& log, std::ostream& err) {
  try {
    if (subcommand == "curve") return cmd_curve(cfg, log);
    if (subcommand == "surface") return cmd_surface(cfg, log);
    if (subcommand == "mcmc-study") return cmd_mcmc_study(cfg, log);
    if (subcommand == "bma") return cmd_bma(cfg, log);
    if (subcommand == "gen-meta") return cmd_gen_meta(cfg, log);
    if (subcommand == "validate") return cmd_validate(cfg, log);
    err << "error: unknown subcommand '" << subcommand << "'\n";
    return 2;
  } catch (const ConvergenceError& e) {
    err << "error: MCMC did not converge (rerun with --force to proceed anyway)\n" << e.what() << '\n';
    return 3;
  } catch (const MixingError& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  } catch (const Json::exception& e) {
    err << "error: config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace bfsens::app
