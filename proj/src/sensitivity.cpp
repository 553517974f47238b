#include "bfsens/sensitivity.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "bfsens/csv.hpp"
#include "bfsens/error.hpp"

namespace bfsens {

namespace {

struct AnchorOrdinate {
  double log_density;
  double log_prior;
};

AnchorOrdinate anchor_ordinate(const AnchorResult& anchor, const DensityEstimate& dens, const HyperPrior& hyper,
                               const std::string& what) {
  const std::vector<double>& g0 = anchor.gamma0;
  if (g0.size() != hyper.dim()) throw ValidationError("anchor dimension does not match the hyper-prior");
  const PointFlag flag = dens.reliability(g0);
  const double d0 = dens.density(g0);
  if (flag != PointFlag::Ok || !(d0 > 0.0)) {
    std::ostringstream os;
    os << what << ": the density estimate at the anchor (";
    for (std::size_t k = 0; k < g0.size(); ++k) os << (k ? ", " : "") << g0[k];
    os << ") is " << (flag == PointFlag::Ok ? "zero" : to_string(flag))
       << "; re-anchor at a well-supported value of the hyper-parameter";
    throw AnchorPlacementError(os.str());
  }
  return {std::log(d0), hyper.logpdf(g0)};
}

SensitivityCurve assemble(const AnchorResult& anchor, const DensityEstimate& dens, const HyperPrior& hyper,
                          const Matrix& grid, PointFlag unreliable) {
  if (grid.cols() != hyper.dim()) throw ValidationError("grid dimension does not match the hyper-prior");
  const AnchorOrdinate a0 = anchor_ordinate(anchor, dens, hyper, "sensitivity curve");
  SensitivityCurve curve;
  curve.grid = grid;
  curve.anchor = anchor;
  curve.method = to_string(dens.kind());
  curve.support = hyper.bounds;
  curve.anchor_node = nearest_node(grid, anchor.gamma0);
  curve.log_bf.assign(grid.rows(), NAN);
  curve.flags.assign(grid.rows(), PointFlag::Ok);
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    const auto g = grid.row(i);
    PointFlag flag = dens.reliability(g);
    const double d = flag == PointFlag::Ok ? dens.density(g) : 0.0;
    if (flag == PointFlag::Ok && !(d > 0.0)) flag = PointFlag::Sparse;
    if (flag == PointFlag::Sparse) flag = unreliable;
    curve.flags[i] = flag;
    if (flag != PointFlag::Ok) continue;
    curve.log_bf[i] = anchor.log_bf10 + std::log(d) - a0.log_density + a0.log_prior - hyper.logpdf(g);
  }
  return curve;
}

}  // namespace

SensitivityCurve bf_curve(const AnchorResult& anchor, const DensityEstimate& dens, const HyperPrior& hyper,
                          const Matrix& grid) {
  return assemble(anchor, dens, hyper, grid, PointFlag::Sparse);
}

SensitivityCurve bf_surface(const AnchorResult& anchor, const DensityEstimate& dens, const HyperPrior& hyper,
                            const Matrix& lattice) {
  if (hyper.dim() != 2) throw ValidationError("bf_surface needs a two-dimensional hyper-prior");
  return assemble(anchor, dens, hyper, lattice, PointFlag::Blank);
}

SensitivityCurve inclusion_bf_curve_bridge(const BmaComponents& anchors, double sigma0,
                                           const DensityEstimate& dens_fe, const DensityEstimate& dens_re,
                                           const HyperPrior& hyper, const EnsembleSpec& ensemble,
                                           const Matrix& grid) {
  ensemble.validate();
  if (hyper.dim() != 1 || grid.cols() != 1) throw ValidationError("inclusion curves are one-dimensional");
  const AnchorResult fe_anchor{{sigma0}, anchors.log_bf_fe_alt, "component", anchors.est_error};
  const AnchorResult re_anchor{{sigma0}, anchors.log_bf_re_alt, "component", anchors.est_error};
  const bool use_fe = ensemble.p_fe_alt > 0.0;
  const bool use_re = ensemble.p_re_alt > 0.0;
  const SensitivityCurve fe = use_fe ? bf_curve(fe_anchor, dens_fe, hyper, grid) : SensitivityCurve{};
  const SensitivityCurve re = use_re ? bf_curve(re_anchor, dens_re, hyper, grid) : SensitivityCurve{};

  SensitivityCurve curve;
  curve.grid = grid;
  curve.support = hyper.bounds;
  curve.method = "bridge:" + to_string(use_fe ? dens_fe.kind() : dens_re.kind());
  curve.anchor = {{sigma0}, log_inclusion_bf(anchors, ensemble), "quadrature", anchors.est_error};
  curve.anchor_node = nearest_node(grid, curve.anchor.gamma0);
  curve.log_bf.assign(grid.rows(), NAN);
  curve.flags.assign(grid.rows(), PointFlag::Ok);
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    PointFlag flag = PointFlag::Ok;
    if (use_fe && !fe.ok(i)) flag = fe.flags[i];
    if (use_re && !re.ok(i)) flag = re.flags[i];
    curve.flags[i] = flag;
    if (flag != PointFlag::Ok) continue;
    BmaComponents z = anchors;
    if (use_fe) z.log_bf_fe_alt = fe.log_bf[i];
    if (use_re) z.log_bf_re_alt = re.log_bf[i];
    curve.log_bf[i] = log_inclusion_bf(z, ensemble);
  }
  return curve;
}

SensitivityCurve inclusion_bf_curve_product_space(const AnchorResult& anchor_incl, const PosteriorDraws& draws,
                                                  const DensityEstimate& dens, const HyperPrior& hyper,
                                                  const Matrix& grid) {
  if (!draws.indicator) throw ValidationError("draws do not come from the product-space sampler");
  if (!draws.mixed)
    throw MixingError(
        "the model indicator never left one component in at least one chain; retune the pseudo-prior "
        "(e.g. a longer pilot run) or increase warmup");
  SensitivityCurve curve = bf_curve(anchor_incl, dens, hyper, grid);
  curve.method = "product-space:" + curve.method;
  return curve;
}

bool in_truncated_region(const Box& support, std::span<const double> gamma) {
  for (std::size_t d = 0; d < support.size(); ++d) {
    const double margin = 0.05 * support[d].width();
    if (gamma[d] < support[d].lower + margin || gamma[d] > support[d].upper - margin) return false;
  }
  return true;
}

namespace {

void require_common_grid(const SensitivityCurve& a, const SensitivityCurve& b) {
  if (a.grid.rows() != b.grid.rows() || a.grid.cols() != b.grid.cols())
    throw ValidationError("curves are on different grids");
  for (std::size_t i = 0; i < a.grid.rows(); ++i)
    for (std::size_t k = 0; k < a.grid.cols(); ++k)
      if (std::abs(a.grid(i, k) - b.grid(i, k)) > 1e-12 * (1.0 + std::abs(a.grid(i, k))))
        throw ValidationError("curves are on different grids");
}

}  // namespace

ErrorReport curve_error_report(const SensitivityCurve& a, const SensitivityCurve& b) {
  require_common_grid(a, b);
  ErrorReport r;
  double sq = 0.0;
  double sq_t = 0.0;
  const Box& support = a.support.size() ? a.support : b.support;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.ok(i) || !b.ok(i)) continue;
    const double e = a.log_bf[i] - b.log_bf[i];
    r.mae += std::abs(e);
    sq += e * e;
    r.max_abs = std::max(r.max_abs, std::abs(e));
    ++r.n_points;
    if (support.size() == a.dim() && in_truncated_region(support, a.grid.row(i))) {
      r.mae_t += std::abs(e);
      sq_t += e * e;
      ++r.n_truncated;
    }
  }
  if (r.n_points == 0) throw ValidationError("curves share no valid grid points");
  r.mae /= static_cast<double>(r.n_points);
  r.rmse = std::sqrt(sq / static_cast<double>(r.n_points));
  if (r.n_truncated > 0) {
    r.mae_t /= static_cast<double>(r.n_truncated);
    r.rmse_t = std::sqrt(sq_t / static_cast<double>(r.n_truncated));
  } else {
    r.mae_t = r.rmse_t = NAN;
  }
  return r;
}

DualDiagnostic dual_estimator_diagnostic(const SensitivityCurve& kde, const SensitivityCurve& iwmde, double tol) {
  require_common_grid(kde, iwmde);
  DualDiagnostic d;
  d.log_ratio.assign(kde.size(), NAN);
  for (std::size_t i = 0; i < kde.size(); ++i) {
    if (!kde.ok(i) || !iwmde.ok(i)) continue;
    const double v = kde.log_bf[i] - iwmde.log_bf[i];
    d.log_ratio[i] = v;
    d.max_divergence = std::max(d.max_divergence, std::abs(v));
    if (kde.support.size() == kde.dim() && in_truncated_region(kde.support, kde.grid.row(i)))
      d.max_interior_divergence = std::max(d.max_interior_divergence, std::abs(v));
    if (std::abs(v) > tol) d.exceeding.push_back(i);
  }
  d.pass = d.exceeding.empty();
  return d;
}

void write_curve_csv(std::ostream& out, const SensitivityCurve& curve, const std::vector<std::string>& gamma_names) {
  if (gamma_names.size() != curve.dim()) throw ValidationError("one column name per grid dimension is required");
  std::string anchor_gamma;
  for (std::size_t k = 0; k < curve.anchor.gamma0.size(); ++k)
    anchor_gamma += (k ? ";" : "") + csv::format_double(curve.anchor.gamma0[k]);
  for (const auto& n : gamma_names) out << n << ',';
  out << "log_bf,bf,flag,method,anchor_gamma,anchor_log_bf\n";
  const std::string anchor_log_bf = csv::format_double(curve.anchor.log_bf10);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    for (std::size_t k = 0; k < curve.dim(); ++k) out << csv::format_double(curve.grid(i, k)) << ',';
    const double lb = curve.ok(i) ? curve.log_bf[i] : NAN;
    out << csv::format_double(lb) << ',' << csv::format_double(std::exp(lb)) << ',' << to_string(curve.flags[i])
        << ',' << curve.method << ',' << anchor_gamma << ',' << anchor_log_bf << '\n';
  }
}

SensitivityCurve read_curve_csv(std::istream& in) {
  const csv::Table t = csv::read(in);
  const std::size_t lb_col = t.column("log_bf");
  if (lb_col == 0) throw ValidationError("curve CSV has no grid columns");
  const std::size_t flag_col = t.column("flag");
  const std::size_t method_col = t.column("method");
  const std::size_t ag_col = t.column("anchor_gamma");
  const std::size_t al_col = t.column("anchor_log_bf");
  SensitivityCurve c;
  c.grid = Matrix(t.rows.size(), lb_col);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = "curve row " + std::to_string(r + 1);
    for (std::size_t k = 0; k < lb_col; ++k) c.grid(r, k) = csv::parse_double(row[k], ctx);
    c.log_bf.push_back(csv::parse_double(row[lb_col], ctx));
    c.flags.push_back(parse_point_flag(row[flag_col]));
  }
  if (!t.rows.empty()) {
    const auto& first = t.rows.front();
    c.method = first[method_col];
    std::stringstream ss(first[ag_col]);
    std::string part;
    while (std::getline(ss, part, ';')) c.anchor.gamma0.push_back(csv::parse_double(part, "anchor_gamma"));
    c.anchor.log_bf10 = csv::parse_double(first[al_col], "anchor_log_bf");
    c.anchor_node = nearest_node(c.grid, c.anchor.gamma0);
  }
  return c;
}

}  // namespace bfsens
