#pragma once

// Estimators of the gamma-posterior density ordinate p(gamma | y).

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfsens/curve.hpp"
#include "bfsens/extended_model.hpp"
#include "bfsens/mcmc.hpp"
#include "bfsens/types.hpp"

namespace bfsens {

enum class DensityKind { Kde, Iwmde, Cmde, TruncNormal, Analytic };

std::string to_string(DensityKind kind);

// Counts samples in a +-half_width box around a point. Points with fewer than
// min_count samples are sparse.
class SparseMask {
 public:
  SparseMask(const Matrix& samples, std::vector<double> half_width, std::size_t min_count = 50);

  std::size_t count(std::span<const double> point) const;
  bool sparse(std::span<const double> point) const { return count(point) < min_count_; }
  const std::vector<double>& half_width() const noexcept { return half_width_; }

 private:
  Matrix sorted_;  // sorted by the first coordinate
  std::vector<double> first_;
  std::vector<double> half_width_;
  std::size_t min_count_;
};

// Mask with half-widths of three plug-in bandwidths per dimension.
std::shared_ptr<const SparseMask> default_sparse_mask(const Matrix& samples);

class DensityEstimate {
 public:
  DensityEstimate(Box support, std::shared_ptr<const SparseMask> mask)
      : support_(std::move(support)), mask_(std::move(mask)) {}
  virtual ~DensityEstimate() = default;

  virtual DensityKind kind() const = 0;
  // Nonnegative; zero outside the support.
  virtual double density(std::span<const double> gamma) const = 0;

  PointFlag reliability(std::span<const double> gamma) const;
  const Box& support() const noexcept { return support_; }
  std::size_t dim() const noexcept { return support_.size(); }
  const SparseMask* mask() const noexcept { return mask_.get(); }

 protected:
  Box support_;
  std::shared_ptr<const SparseMask> mask_;
};

using DensityPtr = std::shared_ptr<const DensityEstimate>;

// A known density (used when the gamma-posterior is available in closed form).
class FunctionDensity final : public DensityEstimate {
 public:
  FunctionDensity(Box support, std::function<double(std::span<const double>)> f)
      : DensityEstimate(std::move(support), nullptr), f_(std::move(f)) {}

  DensityKind kind() const override { return DensityKind::Analytic; }
  double density(std::span<const double> gamma) const override;

 private:
  std::function<double(std::span<const double>)> f_;
};

struct KdeSpec {
  enum class Boundary { Reflect, None };

  std::size_t n_bins = 401;
  std::optional<std::vector<double>> bandwidth;  // per dimension; plug-in when absent
  Boundary boundary = Boundary::Reflect;

  void validate(std::size_t dim) const;
};

// Direct plug-in bandwidth (two functional-estimation stages, binned on 401
// points, scale min(sd, IQR / 1.349)) for a Gaussian kernel.
double plug_in_bandwidth(std::span<const double> samples);

class KdeDensity final : public DensityEstimate {
 public:
  KdeDensity(Box support, std::shared_ptr<const SparseMask> mask, std::vector<double> bandwidth,
             std::size_t n_bins, std::vector<double> grid_values);

  DensityKind kind() const override { return DensityKind::Kde; }
  double density(std::span<const double> gamma) const override;
  const std::vector<double>& bandwidth() const noexcept { return bandwidth_; }

 private:
  std::vector<double> bandwidth_;
  std::size_t n_bins_;
  std::vector<double> values_;  // density at grid nodes, row-major in 2-D
};

// Binned Gaussian KDE in one or two dimensions (separable kernel).
std::shared_ptr<const KdeDensity> kde_fit(const Matrix& samples, const KdeSpec& spec, const Box& support);

enum class IwmdeWeight { Uniform, Conditional };

std::string to_string(IwmdeWeight weight);

// Likelihood-free importance-weighted marginal density estimator. Each draw
// contributes w(gamma_i | theta_i) p(theta_i | gamma*) pi(gamma*) /
// (p(theta_i | gamma_i) pi(gamma_i)). The conditional weight needs a closed
// form full conditional from the model; with it the estimator is the CMDE.
class IwmdeDensity final : public DensityEstimate {
 public:
  IwmdeDensity(const SensitivityModel& model, const PosteriorDraws& draws, IwmdeWeight weight,
               std::shared_ptr<const SparseMask> mask);

  DensityKind kind() const override { return DensityKind::Iwmde; }
  double density(std::span<const double> gamma) const override;

 private:
  const SensitivityModel* model_;
  Matrix theta_;
  std::vector<double> log_base_;  // log w_i - log p(theta_i | gamma_i) - log pi(gamma_i)
};

std::shared_ptr<const IwmdeDensity> iwmde_fit(const PosteriorDraws& draws, const SensitivityModel& model,
                                              IwmdeWeight weight);

// Average of the closed-form conditional p(r | delta_i) on [L, U] for the
// Cauchy-scale t-test.
class CmdeTTestDensity final : public DensityEstimate {
 public:
  CmdeTTestDensity(std::vector<double> delta, Interval support, std::shared_ptr<const SparseMask> mask);

  DensityKind kind() const override { return DensityKind::Cmde; }
  double density(std::span<const double> gamma) const override;

 private:
  std::vector<double> delta_;
  std::vector<double> log_norm_;
};

// Draws must come from a one-dimensional Cauchy-scale model (theta column 0 = delta).
std::shared_ptr<const CmdeTTestDensity> cmde_ttest(const PosteriorDraws& draws, Interval support);

struct TruncNormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};

class TruncNormalDensity final : public DensityEstimate {
 public:
  TruncNormalDensity(Box support, std::shared_ptr<const SparseMask> mask, std::vector<TruncNormalParams> params);

  DensityKind kind() const override { return DensityKind::TruncNormal; }
  double density(std::span<const double> gamma) const override;
  const std::vector<TruncNormalParams>& params() const noexcept { return params_; }

 private:
  std::vector<TruncNormalParams> params_;
  std::vector<double> log_z_;
};

// Per-dimension maximum-likelihood truncated normal (diagonal in 2-D).
// Throws ConvergenceError when Newton iteration fails.
std::shared_ptr<const TruncNormalDensity> trunc_normal_fit(const Matrix& samples, const Box& support);

// grid columns, density, flag.
void write_density_csv(std::ostream& out, const DensityEstimate& dens, const Matrix& grid,
                       const std::vector<std::string>& gamma_names);

}  // namespace bfsens
