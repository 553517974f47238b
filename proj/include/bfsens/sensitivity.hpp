#pragma once

// Sensitivity curves from an anchor Bayes factor and a gamma-posterior density:
//   log BF(g) = log BF(g0) + log p(g | y) - log p(g0 | y) + log pi(g0) - log pi(g).

#include <iosfwd>
#include <string>
#include <vector>

#include "bfsens/curve.hpp"
#include "bfsens/density.hpp"
#include "bfsens/mcmc.hpp"
#include "bfsens/oracle.hpp"

namespace bfsens {

// Sparse points are flagged Sparse (1-D) and carry no value. Throws
// AnchorPlacementError when the density at the anchor is zero or sparse.
SensitivityCurve bf_curve(const AnchorResult& anchor, const DensityEstimate& dens, const HyperPrior& hyper,
                          const Matrix& grid);

// As bf_curve on a 2-D lattice; unreliable cells are flagged Blank.
SensitivityCurve bf_surface(const AnchorResult& anchor, const DensityEstimate& dens, const HyperPrior& hyper,
                            const Matrix& lattice);

// Inclusion BF from separately fitted FE and RE alternatives: each component's
// marginal likelihood is rebuilt from its anchor (relative to the FE null) and
// its own density ratio; the nulls are constant in sigma_mu.
SensitivityCurve inclusion_bf_curve_bridge(const BmaComponents& anchors, double sigma0,
                                           const DensityEstimate& dens_fe, const DensityEstimate& dens_re,
                                           const HyperPrior& hyper, const EnsembleSpec& ensemble,
                                           const Matrix& grid);

// Inclusion BF from pooled product-space sigma_mu draws. Throws MixingError
// when some chain never switched component.
SensitivityCurve inclusion_bf_curve_product_space(const AnchorResult& anchor_incl, const PosteriorDraws& draws,
                                                  const DensityEstimate& dens, const HyperPrior& hyper,
                                                  const Matrix& grid);

struct ErrorReport {
  double mae = 0.0;
  double rmse = 0.0;
  double mae_t = 0.0;   // outer 5% of the support dropped on each side
  double rmse_t = 0.0;
  double max_abs = 0.0;
  std::size_t n_points = 0;
  std::size_t n_truncated = 0;
};

// Metrics of log(BF_a / BF_b) over points valid in both curves.
ErrorReport curve_error_report(const SensitivityCurve& a, const SensitivityCurve& b);

// True when the point lies in the central 90% of the support in every dimension.
bool in_truncated_region(const Box& support, std::span<const double> gamma);

struct DualDiagnostic {
  std::vector<double> log_ratio;  // NaN where either curve has no value
  std::vector<std::size_t> exceeding;
  double max_divergence = 0.0;
  double max_interior_divergence = 0.0;
  bool pass = true;
};

DualDiagnostic dual_estimator_diagnostic(const SensitivityCurve& kde, const SensitivityCurve& iwmde, double tol);

// Columns: <gamma names>, log_bf, bf, flag, method, anchor_gamma, anchor_log_bf.
// A 2-D anchor is written as "g1;g2".
void write_curve_csv(std::ostream& out, const SensitivityCurve& curve, const std::vector<std::string>& gamma_names);
SensitivityCurve read_curve_csv(std::istream& in);

}  // namespace bfsens
