#pragma once

// End-to-end runs shared by the CLI subcommands and the acceptance suite.

#include <cstddef>
#include <string>
#include <vector>

#include "bfsens/density.hpp"
#include "bfsens/mcmc.hpp"
#include "bfsens/oracle.hpp"
#include "bfsens/sensitivity.hpp"

namespace bfsens::app {

// Estimator names accepted on the command line and in configs.
inline constexpr const char* kEstimatorNames[] = {"kde", "iwmde", "iwmde-conditional", "cmde", "trunc-normal"};

bool is_estimator(const std::string& name);

// Fits the named estimator to the gamma draws. `model` supplies the
// conditional prior for the IWMDE variants.
DensityPtr fit_density(const std::string& estimator, const PosteriorDraws& draws, const SensitivityModel& model);

// bf_curve for 1-D hyper-priors, bf_surface for 2-D. The method tag is the
// estimator name.
SensitivityCurve estimate_curve(const std::string& estimator, const DensityEstimate& dens, const AnchorResult& anchor,
                                const HyperPrior& hyper, const Matrix& grid);

// Throws ConvergenceError carrying the diagnostics table unless the draws
// converged or `force` is set.
void check_draws(const PosteriorDraws& draws, bool force);

// Keeps the first n draws, spread as evenly as possible over the chains
// (earlier chains take the remainder), and recomputes the diagnostics.
PosteriorDraws truncate_draws(const PosteriorDraws& draws, std::size_t n);

struct CurveRun {
  SensitivityCurve oracle;
  PosteriorDraws draws;
  std::vector<SensitivityCurve> curves;  // one per estimator, in request order
};

// Oracle curve plus one estimated curve per estimator on the same grid.
// The anchor comes from the oracle at gamma0.
CurveRun run_curve_experiment(const SensitivityModel& model, const ExactBayesFactor& oracle,
                              const std::vector<double>& gamma0, const Matrix& grid,
                              const std::vector<std::string>& estimators, const ChainConfig& chains,
                              const QuadratureSpec& quad, bool force);

struct StudyRow {
  std::size_t n = 0;  // total kept draws
  std::string method;
  ErrorReport error;
  bool converged = false;
  double seconds = 0.0;  // sampling plus estimation; never written to files
  SensitivityCurve curve;
};

// Refits the extended Cauchy t-test at each total draw count and scores each
// estimator against `oracle`. Counts that are not a multiple of the chain
// count sample one extra draw per chain and drop the surplus. Unconverged
// fits throw unless `force`.
std::vector<StudyRow> run_mcmc_study(const CauchyTTestModel& model, const SensitivityCurve& oracle,
                                     const std::vector<std::size_t>& draw_counts,
                                     const std::vector<std::string>& estimators, const ChainConfig& base,
                                     bool force);

enum class BmaStrategy { Bridge, ProductSpace, Both };

BmaStrategy parse_bma_strategy(const std::string& name);
std::string to_string(BmaStrategy s);

struct BmaSetup {
  MetaData data;
  HeterogeneityPrior tau_prior;
  EnsembleSpec ensemble;
  HyperPrior hyper = HyperPrior::uniform(0.0, 2.0);
  double sigma0 = 1.0;
  Matrix grid;             // curve grid
  Matrix validation_grid;  // oracle refit points
};

struct BmaRun {
  BmaComponents anchors;
  double anchor_log_bf_incl = 0.0;
  SensitivityCurve validation;  // exact inclusion BF at the validation points
  // Curves on the curve grid and on the validation grid, tagged
  // "<strategy>:<estimator>".
  std::vector<SensitivityCurve> curves;
  std::vector<SensitivityCurve> validation_curves;
  HeterogeneityPrior pseudo_prior;
  double product_space_p_re = 0.0;  // posterior frequency of the RE component
};

BmaRun run_bma_experiment(const BmaSetup& setup, BmaStrategy strategy, const std::vector<std::string>& estimators,
                          const ChainConfig& chains, const QuadratureSpec& quad, bool force);

// Default 10-point validation grid {0.2, 0.4, ..., 2.0} scaled to the support.
Matrix default_validation_grid(const HyperPrior& hyper);

}  // namespace bfsens::app
