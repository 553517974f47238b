#include "bfsens/density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "bfsens/csv.hpp"
#include "bfsens/error.hpp"

namespace bfsens {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double phi(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Linear binning of samples onto m equispaced nodes on [a, b]; samples
// outside the range are dropped.
std::vector<double> linear_bin(std::span<const double> x, double a, double b, std::size_t m) {
  std::vector<double> counts(m, 0.0);
  const double delta = (b - a) / static_cast<double>(m - 1);
  for (double v : x) {
    const double pos = (v - a) / delta;
    if (!(pos >= 0.0) || pos > static_cast<double>(m - 1)) continue;
    const auto j = std::min(static_cast<std::size_t>(pos), m - 2);
    const double frac = pos - static_cast<double>(j);
    counts[j] += 1.0 - frac;
    counts[j + 1] += frac;
  }
  return counts;
}

// Binned kernel functional estimate of psi_r = E[f^(r)(X)] for even r.
double binned_psi(const std::vector<double>& counts, double delta, int r, double h, double n) {
  const std::size_t m = counts.size();
  const double tau = 4.0 + r;
  const auto len = std::min(static_cast<std::size_t>(std::floor(tau * h / delta)), m - 1);
  std::vector<double> kappa(len + 1);
  for (std::size_t l = 0; l <= len; ++l) {
    const double arg = static_cast<double>(l) * delta / h;
    // Probabilists' Hermite polynomial He_r(arg).
    double h0 = 1.0;
    double h1 = arg;
    double hr = r == 0 ? 1.0 : arg;
    for (int i = 2; i <= r; ++i) {
      hr = arg * h1 - (i - 1) * h0;
      h0 = h1;
      h1 = hr;
    }
    kappa[l] = hr * phi(arg) / std::pow(h, r + 1);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (counts[j] == 0.0) continue;
    double conv = 0.0;
    const std::size_t lo = j >= len ? j - len : 0;
    const std::size_t hi = std::min(m - 1, j + len);
    for (std::size_t k = lo; k <= hi; ++k) conv += counts[k] * kappa[k > j ? k - j : j - k];
    total += counts[j] * conv;
  }
  return total / (n * n);
}

double quantile_sorted(const std::vector<double>& s, double p) {
  // Type-7 sample quantile.
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

// M x M smoothing matrix for one dimension: A[j][k] is the kernel weight of
// node k's binned mass at node j, including mirror images at both ends.
std::vector<double> smoothing_matrix(std::size_t m, double delta, double h, bool reflect) {
  std::vector<double> a(m * m);
  auto kern = [&](double d) { return phi(d * delta / h) / h; };
  const auto last = static_cast<double>(m - 1);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k) {
      const double dj = static_cast<double>(j);
      const double dk = static_cast<double>(k);
      double w = kern(dj - dk);
      if (reflect) w += kern(dj + dk) + kern(2.0 * last - dj - dk);
      a[j * m + k] = w;
    }
  return a;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// log(Phi(b) - Phi(a)) for a < b, accurate in both tails.
double log_normal_mass(double a, double b) {
  if (a > 0.0) return log_normal_mass(-b, -a);
  const double mass = normal_cdf(b) - normal_cdf(a);
  return std::log(mass);
}

}  // namespace

std::string to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::Kde:
      return "kde";
    case DensityKind::Iwmde:
      return "iwmde";
    case DensityKind::Cmde:
      return "cmde";
    case DensityKind::TruncNormal:
      return "trunc-normal";
    case DensityKind::Analytic:
      return "analytic";
  }
  return "unknown";
}

std::string to_string(IwmdeWeight weight) {
  return weight == IwmdeWeight::Uniform ? "uniform" : "conditional";
}

// --- SparseMask --------------------------------------------------------------

SparseMask::SparseMask(const Matrix& samples, std::vector<double> half_width, std::size_t min_count)
    : half_width_(std::move(half_width)), min_count_(min_count) {
  if (half_width_.size() != samples.cols()) throw ValidationError("mask half-widths do not match the sample dimension");
  std::vector<std::size_t> idx(samples.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return samples(a, 0) < samples(b, 0); });
  sorted_ = Matrix(samples.rows(), samples.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < samples.cols(); ++c) sorted_(r, c) = samples(idx[r], c);
  first_ = sorted_.column(0);
}

std::size_t SparseMask::count(std::span<const double> point) const {
  const auto lo = std::lower_bound(first_.begin(), first_.end(), point[0] - half_width_[0]);
  const auto hi = std::upper_bound(first_.begin(), first_.end(), point[0] + half_width_[0]);
  if (sorted_.cols() == 1) return static_cast<std::size_t>(hi - lo);
  std::size_t n = 0;
  for (auto it = lo; it != hi; ++it) {
    const auto r = static_cast<std::size_t>(it - first_.begin());
    bool inside = true;
    for (std::size_t c = 1; c < sorted_.cols() && inside; ++c)
      inside = std::abs(sorted_(r, c) - point[c]) <= half_width_[c];
    n += inside ? 1 : 0;
  }
  return n;
}

std::shared_ptr<const SparseMask> default_sparse_mask(const Matrix& samples) {
  std::vector<double> hw;
  for (std::size_t c = 0; c < samples.cols(); ++c) hw.push_back(3.0 * plug_in_bandwidth(samples.column(c)));
  return std::make_shared<SparseMask>(samples, std::move(hw));
}

PointFlag DensityEstimate::reliability(std::span<const double> gamma) const {
  if (gamma.size() != dim() || !support_.contains_closed(gamma)) return PointFlag::OutOfSupport;
  if (mask_ && mask_->sparse(gamma)) return PointFlag::Sparse;
  return PointFlag::Ok;
}

double FunctionDensity::density(std::span<const double> gamma) const {
  if (!support_.contains_closed(gamma)) return 0.0;
  return std::max(0.0, f_(gamma));
}

// --- Plug-in bandwidth ---------------------------------------------------------

double plug_in_bandwidth(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 100) throw ValidationError("plug-in bandwidth needs at least 100 samples");
  for (double v : samples)
    if (!std::isfinite(v)) throw ValidationError("plug-in bandwidth: non-finite sample");
  const double dn = static_cast<double>(n);
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / dn;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (dn - 1.0));
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (!(sd > 0.0) || sorted.front() == sorted.back())
    throw ValidationError("plug-in bandwidth: degenerate (zero-variance) sample");
  const double iqr = (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)) / 1.3489795003921634;
  const double scale = iqr > 0.0 ? std::min(sd, iqr) : sd;

  // Work on the standardized sample.
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (samples[i] - mean) / scale;
  const double a = (sorted.front() - mean) / scale;
  const double b = (sorted.back() - mean) / scale;
  constexpr std::size_t kGrid = 401;
  const std::vector<double> counts = linear_bin(z, a, b, kGrid);
  const double delta = (b - a) / static_cast<double>(kGrid - 1);

  const double alpha6 = std::pow(2.0 * std::pow(std::numbers::sqrt2, 9) / (7.0 * dn), 1.0 / 9.0);
  const double psi6 = binned_psi(counts, delta, 6, alpha6, dn);
  if (!(psi6 < 0.0)) throw ValidationError("plug-in bandwidth: sixth-derivative functional is not negative");
  const double alpha4 = std::pow(-3.0 * std::sqrt(2.0 / std::numbers::pi) / (psi6 * dn), 1.0 / 7.0);
  const double psi4 = binned_psi(counts, delta, 4, alpha4, dn);
  if (!(psi4 > 0.0)) throw ValidationError("plug-in bandwidth: fourth-derivative functional is not positive");
  return scale * std::pow(4.0 * std::numbers::pi, -0.1) * std::pow(1.0 / (psi4 * dn), 0.2);
}

// --- KDE ---------------------------------------------------------------------

void KdeSpec::validate(std::size_t dim) const {
  if (n_bins < 3) throw ValidationError("KDE needs at least 3 bins");
  if (bandwidth) {
    if (bandwidth->size() != dim) throw ValidationError("KDE bandwidth count does not match the dimension");
    for (double h : *bandwidth)
      if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("KDE bandwidth must be positive");
  }
}

KdeDensity::KdeDensity(Box support, std::shared_ptr<const SparseMask> mask, std::vector<double> bandwidth,
                       std::size_t n_bins, std::vector<double> grid_values)
    : DensityEstimate(std::move(support), std::move(mask)),
      bandwidth_(std::move(bandwidth)),
      n_bins_(n_bins),
      values_(std::move(grid_values)) {}

double KdeDensity::density(std::span<const double> gamma) const {
  if (gamma.size() != dim() || !support_.contains_closed(gamma)) return 0.0;
  const std::size_t m = n_bins_;
  std::size_t j[2] = {0, 0};
  double f[2] = {0.0, 0.0};
  for (std::size_t d = 0; d < dim(); ++d) {
    const double pos = (gamma[d] - support_[d].lower) / support_[d].width() * static_cast<double>(m - 1);
    j[d] = std::min(static_cast<std::size_t>(pos), m - 2);
    f[d] = pos - static_cast<double>(j[d]);
  }
  if (dim() == 1) return (1.0 - f[0]) * values_[j[0]] + f[0] * values_[j[0] + 1];
  auto v = [&](std::size_t a, std::size_t b) { return values_[a * m + b]; };
  return (1.0 - f[0]) * ((1.0 - f[1]) * v(j[0], j[1]) + f[1] * v(j[0], j[1] + 1)) +
         f[0] * ((1.0 - f[1]) * v(j[0] + 1, j[1]) + f[1] * v(j[0] + 1, j[1] + 1));
}

std::shared_ptr<const KdeDensity> kde_fit(const Matrix& samples, const KdeSpec& spec, const Box& support) {
  const std::size_t dim = samples.cols();
  if (dim != support.size() || (dim != 1 && dim != 2)) throw ValidationError("KDE is one- or two-dimensional");
  if (samples.rows() < 500) throw ValidationError("KDE needs at least 500 samples");
  spec.validate(dim);
  for (std::size_t r = 0; r < samples.rows(); ++r)
    if (!support.contains_closed(samples.row(r))) throw ValidationError("KDE sample outside the support");

  std::vector<double> h;
  if (spec.bandwidth) {
    h = *spec.bandwidth;
  } else {
    for (std::size_t d = 0; d < dim; ++d) h.push_back(plug_in_bandwidth(samples.column(d)));
  }
  std::vector<double> mask_hw(h.size());
  std::transform(h.begin(), h.end(), mask_hw.begin(), [](double v) { return 3.0 * v; });
  auto mask = std::make_shared<SparseMask>(samples, mask_hw);

  const std::size_t m = spec.n_bins;
  const bool reflect = spec.boundary == KdeSpec::Boundary::Reflect;
  const double n = static_cast<double>(samples.rows());
  std::vector<double> delta(dim);
  for (std::size_t d = 0; d < dim; ++d) delta[d] = support[d].width() / static_cast<double>(m - 1);

  std::vector<double> values;
  if (dim == 1) {
    const std::vector<double> counts = linear_bin(samples.column(0), support[0].lower, support[0].upper, m);
    const std::vector<double> a = smoothing_matrix(m, delta[0], h[0], reflect);
    values.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += a[j * m + k] * counts[k];
      values[j] = s / n;
    }
  } else {
    // Bilinear binning, then smoothing along each axis in turn.
    std::vector<double> counts(m * m, 0.0);
    for (std::size_t r = 0; r < samples.rows(); ++r) {
      std::size_t j[2];
      double f[2];
      for (std::size_t d = 0; d < 2; ++d) {
        const double pos = (samples(r, d) - support[d].lower) / delta[d];
        j[d] = std::min(static_cast<std::size_t>(pos), m - 2);
        f[d] = pos - static_cast<double>(j[d]);
      }
      counts[j[0] * m + j[1]] += (1.0 - f[0]) * (1.0 - f[1]);
      counts[j[0] * m + j[1] + 1] += (1.0 - f[0]) * f[1];
      counts[(j[0] + 1) * m + j[1]] += f[0] * (1.0 - f[1]);
      counts[(j[0] + 1) * m + j[1] + 1] += f[0] * f[1];
    }
    const std::vector<double> a0 = smoothing_matrix(m, delta[0], h[0], reflect);
    const std::vector<double> a1 = smoothing_matrix(m, delta[1], h[1], reflect);
    std::vector<double> tmp(m * m, 0.0);  // smoothed along the second axis
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += a1[j * m + k] * counts[i * m + k];
        tmp[i * m + j] = s;
      }
    values.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < m; ++k) {
        const double w = a0[i * m + k];
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) values[i * m + j] += w * tmp[k * m + j];
      }
    for (double& v : values) v /= n;
  }
  return std::make_shared<KdeDensity>(support, std::move(mask), std::move(h), m, std::move(values));
}

// --- IWMDE -------------------------------------------------------------------

IwmdeDensity::IwmdeDensity(const SensitivityModel& model, const PosteriorDraws& draws, IwmdeWeight weight,
                           std::shared_ptr<const SparseMask> mask)
    : DensityEstimate(model.hyper_prior().bounds, std::move(mask)), model_(&model), theta_(draws.theta) {
  if (draws.gamma.cols() != model.gamma_dim() || draws.theta.cols() != model.theta_dim())
    throw ValidationError("draws do not match the model dimensions");
  if (draws.size() == 0) throw ValidationError("IWMDE needs at least one draw");
  const double log_uniform = -std::log(support_.volume());
  log_base_.resize(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto g = draws.gamma.row(i);
    const auto t = draws.theta.row(i);
    double log_w = log_uniform;
    if (weight == IwmdeWeight::Conditional) {
      const auto lw = model.log_full_conditional(g, t);
      if (!lw) throw ValidationError("model " + model.name() + " has no closed-form full conditional");
      log_w = *lw;
    }
    log_base_[i] = log_w - model.log_conditional_prior(t, g) - model.log_hyper_prior(g);
  }
}

double IwmdeDensity::density(std::span<const double> gamma) const {
  if (gamma.size() != dim() || !support_.contains_closed(gamma)) return 0.0;
  const double lh = model_->log_hyper_prior(gamma);
  double sum = 0.0;
  for (std::size_t i = 0; i < log_base_.size(); ++i)
    sum += std::exp(log_base_[i] + model_->log_conditional_prior(theta_.row(i), gamma) + lh);
  return sum / static_cast<double>(log_base_.size());
}

std::shared_ptr<const IwmdeDensity> iwmde_fit(const PosteriorDraws& draws, const SensitivityModel& model,
                                              IwmdeWeight weight) {
  return std::make_shared<IwmdeDensity>(model, draws, weight, default_sparse_mask(draws.gamma));
}

// --- CMDE --------------------------------------------------------------------

CmdeTTestDensity::CmdeTTestDensity(std::vector<double> delta, Interval support,
                                   std::shared_ptr<const SparseMask> mask)
    : DensityEstimate(Box({support}), std::move(mask)), delta_(std::move(delta)) {
  if (delta_.empty()) throw ValidationError("CMDE needs at least one draw");
}

double CmdeTTestDensity::density(std::span<const double> gamma) const {
  if (gamma.size() != 1 || !support_.contains_closed(gamma)) return 0.0;
  double sum = 0.0;
  for (double d : delta_) sum += std::exp(cauchy_scale_log_full_conditional(gamma[0], d, support_[0]));
  return sum / static_cast<double>(delta_.size());
}

std::shared_ptr<const CmdeTTestDensity> cmde_ttest(const PosteriorDraws& draws, Interval support) {
  if (draws.gamma.cols() != 1 || draws.theta.cols() != 1)
    throw ValidationError("CMDE applies to the one-parameter Cauchy-scale t-test");
  return std::make_shared<CmdeTTestDensity>(draws.theta.column(0), support, default_sparse_mask(draws.gamma));
}

// --- Truncated normal ----------------------------------------------------------

namespace {

// First four raw moments of N(mu, sigma^2) truncated to [a, b].
std::array<double, 5> trunc_normal_moments(double mu, double sigma, double a, double b) {
  const double al = (a - mu) / sigma;
  const double be = (b - mu) / sigma;
  const double z = std::exp(log_normal_mass(al, be));
  // Standardized moments by the recursion m_k = (k-1) m_{k-2} + (al^{k-1} phi(al) - be^{k-1} phi(be)) / z.
  std::array<double, 5> m{1.0, (phi(al) - phi(be)) / z, 0.0, 0.0, 0.0};
  for (int k = 2; k <= 4; ++k)
    m[k] = (k - 1) * m[k - 2] + (std::pow(al, k - 1) * phi(al) - std::pow(be, k - 1) * phi(be)) / z;
  // Raw moments of x = mu + sigma Z.
  std::array<double, 5> r{};
  const double binom[5][5] = {{1}, {1, 1}, {1, 2, 1}, {1, 3, 3, 1}, {1, 4, 6, 4, 1}};
  for (int k = 0; k <= 4; ++k)
    for (int j = 0; j <= k; ++j) r[k] += binom[k][j] * std::pow(mu, k - j) * std::pow(sigma, j) * m[j];
  return r;
}

double trunc_normal_loglik(double mu, double sigma, double a, double b, double s1, double s2) {
  // Mean log-likelihood given the sample means s1 = E[x], s2 = E[x^2].
  return -std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi) -
         0.5 * (s2 - 2.0 * mu * s1 + mu * mu) / (sigma * sigma) -
         log_normal_mass((a - mu) / sigma, (b - mu) / sigma);
}

TruncNormalParams fit_one(const std::vector<double>& x, Interval support) {
  const double n = static_cast<double>(x.size());
  double s1 = 0.0;
  double s2 = 0.0;
  for (double v : x) {
    s1 += v;
    s2 += v * v;
  }
  s1 /= n;
  s2 /= n;
  if (!(s2 - s1 * s1 > 0.0)) throw ConvergenceError("truncated-normal fit: zero-variance sample");

  // Newton on the natural parameters (eta1 = mu / sigma^2, eta2 = -1 / (2 sigma^2));
  // the log-likelihood is concave in them.
  double mu = s1;
  double sigma = std::sqrt(s2 - s1 * s1);
  double ll = trunc_normal_loglik(mu, sigma, support.lower, support.upper, s1, s2);
  for (int it = 0; it < 200; ++it) {
    const auto r = trunc_normal_moments(mu, sigma, support.lower, support.upper);
    const double g1 = s1 - r[1];
    const double g2 = s2 - r[2];
    const double c11 = r[2] - r[1] * r[1];
    const double c12 = r[3] - r[1] * r[2];
    const double c22 = r[4] - r[2] * r[2];
    const double det = c11 * c22 - c12 * c12;
    if (std::abs(g1) < 1e-13 * (1.0 + std::abs(s1)) && std::abs(g2) < 1e-13 * (1.0 + std::abs(s2)))
      return {mu, sigma};
    if (!(det > 0.0)) break;
    const double d1 = (c22 * g1 - c12 * g2) / det;
    const double d2 = (c11 * g2 - c12 * g1) / det;
    const double eta1 = mu / (sigma * sigma);
    const double eta2 = -0.5 / (sigma * sigma);
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      const double e2 = eta2 + step * d2;
      if (!(e2 < 0.0)) continue;
      const double s_new = std::sqrt(-0.5 / e2);
      const double mu_new = (eta1 + step * d1) * s_new * s_new;
      const double ll_new = trunc_normal_loglik(mu_new, s_new, support.lower, support.upper, s1, s2);
      if (std::isfinite(ll_new) && ll_new >= ll - 1e-15 * std::abs(ll)) {
        mu = mu_new;
        sigma = s_new;
        ll = ll_new;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  const auto r = trunc_normal_moments(mu, sigma, support.lower, support.upper);
  if (std::abs(s1 - r[1]) < 1e-9 * (1.0 + std::abs(s1)) && std::abs(s2 - r[2]) < 1e-9 * (1.0 + std::abs(s2)))
    return {mu, sigma};
  throw ConvergenceError("truncated-normal fit did not converge (last iterate mu = " + std::to_string(mu) +
                         ", sigma = " + std::to_string(sigma) + ")");
}

}  // namespace

TruncNormalDensity::TruncNormalDensity(Box support, std::shared_ptr<const SparseMask> mask,
                                       std::vector<TruncNormalParams> params)
    : DensityEstimate(std::move(support), std::move(mask)), params_(std::move(params)) {
  for (std::size_t d = 0; d < params_.size(); ++d)
    log_z_.push_back(log_normal_mass((support_[d].lower - params_[d].mu) / params_[d].sigma,
                                     (support_[d].upper - params_[d].mu) / params_[d].sigma));
}

double TruncNormalDensity::density(std::span<const double> gamma) const {
  if (gamma.size() != dim() || !support_.contains_closed(gamma)) return 0.0;
  double log_f = 0.0;
  for (std::size_t d = 0; d < params_.size(); ++d)
    log_f += normal_logpdf(gamma[d], params_[d].mu, params_[d].sigma) - log_z_[d];
  return std::exp(log_f);
}

std::shared_ptr<const TruncNormalDensity> trunc_normal_fit(const Matrix& samples, const Box& support) {
  if (samples.cols() != support.size()) throw ValidationError("sample dimension does not match the support");
  if (samples.rows() < 500) throw ValidationError("truncated-normal fit needs at least 500 samples");
  std::vector<TruncNormalParams> params;
  for (std::size_t d = 0; d < samples.cols(); ++d) params.push_back(fit_one(samples.column(d), support[d]));
  return std::make_shared<TruncNormalDensity>(support, default_sparse_mask(samples), std::move(params));
}

void write_density_csv(std::ostream& out, const DensityEstimate& dens, const Matrix& grid,
                       const std::vector<std::string>& gamma_names) {
  for (const auto& n : gamma_names) out << n << ',';
  out << "density,flag\n";
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (std::size_t k = 0; k < grid.cols(); ++k) out << csv::format_double(grid(i, k)) << ',';
    out << csv::format_double(dens.density(grid.row(i))) << ',' << to_string(dens.reliability(grid.row(i))) << '\n';
  }
}

}  // namespace bfsens
