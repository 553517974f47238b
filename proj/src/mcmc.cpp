#include "bfsens/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "bfsens/csv.hpp"
#include "bfsens/error.hpp"

namespace bfsens {

namespace {

double std_normal(Philox4x32& rng) { return boost::random::normal_distribution<double>(0.0, 1.0)(rng); }
double uniform01(Philox4x32& rng) { return boost::random::uniform_01<double>()(rng); }

// Per-coordinate random-walk scales with Robbins-Monro adaptation of
// log(scale) toward the target acceptance rate.
struct Adapter {
  std::vector<double> log_scale;
  double target;
  int window;

  double scale(std::size_t j) const { return std::exp(log_scale[j]); }
  void update(std::size_t j, bool accepted, int k) {
    const double gain = std::pow(1.0 + static_cast<double>(k) / window, -0.6);
    log_scale[j] += gain * ((accepted ? 1.0 : 0.0) - target);
  }
};

struct ChainOutput {
  std::vector<double> gamma;
  std::vector<double> theta;
  std::vector<int> indicator;
  std::exception_ptr error;
};

// Runs `n` chains on separate threads and rethrows the first failure.
void run_chains(int n, const std::function<void(int, ChainOutput&)>& body, std::vector<ChainOutput>& out) {
  out.assign(n, {});
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (int c = 0; c < n; ++c)
    threads.emplace_back([&, c] {
      try {
        body(c, out[c]);
      } catch (...) {
        out[c].error = std::current_exception();
      }
    });
  for (auto& t : threads) t.join();
  for (const auto& o : out)
    if (o.error) std::rethrow_exception(o.error);
}

PosteriorDraws merge(std::vector<ChainOutput>& chains, std::size_t gdim, std::size_t tdim, int n_keep,
                     bool with_indicator) {
  PosteriorDraws d;
  const std::size_t total = chains.size() * static_cast<std::size_t>(n_keep);
  d.gamma = Matrix(total, gdim);
  d.theta = Matrix(total, tdim);
  if (with_indicator) d.indicator.emplace();
  std::size_t r = 0;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (int i = 0; i < n_keep; ++i, ++r) {
      for (std::size_t k = 0; k < gdim; ++k) d.gamma(r, k) = chains[c].gamma[i * gdim + k];
      for (std::size_t k = 0; k < tdim; ++k) d.theta(r, k) = chains[c].theta[i * tdim + k];
      d.chain_id.push_back(static_cast<int>(c));
      d.iteration.push_back(i);
      if (with_indicator) d.indicator->push_back(chains[c].indicator[i]);
    }
  }
  return d;
}

double std_normal_quantile(double p) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

std::vector<double> rank_normalize(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> z(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank of ties
    const double v = std_normal_quantile((rank - 0.375) / (static_cast<double>(n) + 0.25));
    for (std::size_t k = i; k <= j; ++k) z[idx[k]] = v;
    i = j + 1;
  }
  return z;
}

using Chains = std::vector<std::vector<double>>;

Chains regroup(const std::vector<double>& flat, std::size_t n_chains, std::size_t len) {
  Chains c(n_chains);
  for (std::size_t k = 0; k < n_chains; ++k) c[k].assign(flat.begin() + k * len, flat.begin() + (k + 1) * len);
  return c;
}

struct ChainMoments {
  std::vector<double> means;
  double w = 0.0;         // mean within-chain variance
  double var_plus = 0.0;  // pooled posterior variance estimate
};

ChainMoments moments(const Chains& chains) {
  ChainMoments m;
  const double n = static_cast<double>(chains[0].size());
  double b_sum = 0.0;
  for (const auto& c : chains) {
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    m.means.push_back(mean);
    m.w += ss / (n - 1.0);
  }
  m.w /= static_cast<double>(chains.size());
  const double grand = std::accumulate(m.means.begin(), m.means.end(), 0.0) / m.means.size();
  for (double mu : m.means) b_sum += (mu - grand) * (mu - grand);
  const double b_over_n = b_sum / (static_cast<double>(chains.size()) - 1.0);
  m.var_plus = (n - 1.0) / n * m.w + b_over_n;
  return m;
}

double rhat_of(const Chains& chains) {
  const ChainMoments m = moments(chains);
  if (m.w <= 0.0) return m.var_plus > 0.0 ? INFINITY : 1.0;
  return std::sqrt(m.var_plus / m.w);
}

double ess_of(const Chains& chains) {
  const ChainMoments m = moments(chains);
  const std::size_t n = chains[0].size();
  const double mn = static_cast<double>(chains.size() * n);
  if (!(m.var_plus > 0.0)) return mn;

  auto mean_acov = [&](std::size_t lag) {
    double total = 0.0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i)
        s += (chains[c][i] - m.means[c]) * (chains[c][i + lag] - m.means[c]);
      total += s / static_cast<double>(n);
    }
    return total / static_cast<double>(chains.size());
  };
  const double w = mean_acov(0) * static_cast<double>(n) / (static_cast<double>(n) - 1.0);
  auto rho = [&](std::size_t lag) { return 1.0 - (w - mean_acov(lag)) / m.var_plus; };

  std::vector<double> r{1.0, rho(1)};
  double even = r[0];
  double odd = r[1];
  std::size_t t = 1;
  while (t + 5 < n && even + odd > 0.0) {
    even = rho(t + 1);
    odd = rho(t + 2);
    if (even + odd >= 0.0) {
      r.push_back(even);
      r.push_back(odd);
    }
    t += 2;
  }
  const std::size_t max_t = r.size() - 1;
  const double tail = even > 0.0 ? even : 0.0;
  for (std::size_t k = 1; k + 2 <= max_t; k += 2) {
    if (r[k + 1] + r[k + 2] > r[k - 1] + r[k]) {
      r[k + 1] = 0.5 * (r[k - 1] + r[k]);
      r[k + 2] = r[k + 1];
    }
  }
  double tau = -1.0 + tail;
  for (std::size_t k = 0; k <= max_t; ++k) tau += 2.0 * r[k];
  tau = std::max(tau, 1.0 / std::log10(mn));
  return mn / tau;
}

}  // namespace

void ChainConfig::validate() const {
  if (n_chains < 2) throw ValidationError("n_chains must be at least 2");
  if (n_warmup < 1) throw ValidationError("n_warmup must be positive");
  if (n_keep < 1000) throw ValidationError("n_keep must be at least 1000");
  if (thin < 1) throw ValidationError("thin must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw ValidationError("target_accept must lie in (0, 1)");
  if (adapt_window < 1) throw ValidationError("adapt_window must be positive");
  if (gamma_substeps < 1) throw ValidationError("gamma_substeps must be positive");
}

int PosteriorDraws::n_chains() const {
  return chain_id.empty() ? 0 : *std::max_element(chain_id.begin(), chain_id.end()) + 1;
}

std::vector<double> PosteriorDraws::chain_column(const Matrix& m, std::size_t col, int chain) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < chain_id.size(); ++i)
    if (chain_id[i] == chain) out.push_back(m(i, col));
  return out;
}

ParamDiagnostics diagnose(std::span<const double> values, std::span<const int> chain_id,
                          const std::string& name) {
  if (values.size() != chain_id.size()) throw ValidationError("diagnostics: misaligned chain ids");
  for (double v : values)
    if (std::isnan(v)) throw ValidationError("diagnostics: NaN draw in " + name);
  const int m = chain_id.empty() ? 0 : *std::max_element(chain_id.begin(), chain_id.end()) + 1;
  std::vector<std::vector<double>> per(m);
  for (std::size_t i = 0; i < values.size(); ++i) per[chain_id[i]].push_back(values[i]);
  std::size_t len = values.size();
  for (const auto& c : per) len = std::min(len, c.size());
  if (m < 2 || len < 100) throw ValidationError("diagnostics need at least 2 chains of 100 draws");

  ParamDiagnostics d{name};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    d.rhat = 1.0;
    d.ess = static_cast<double>(values.size());
    d.degenerate = true;
    return d;
  }

  // Split every chain in half (dropping a middle draw when odd).
  const std::size_t half = len / 2;
  std::vector<double> flat;
  for (const auto& c : per) {
    flat.insert(flat.end(), c.begin(), c.begin() + half);
    flat.insert(flat.end(), c.begin() + (len - half), c.begin() + len);
  }
  const std::size_t n_split = 2 * static_cast<std::size_t>(m);

  const std::vector<double> z = rank_normalize(flat);
  std::vector<double> sorted = flat;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  double median = sorted[sorted.size() / 2];
  if (sorted.size() % 2 == 0) {
    const double below = *std::max_element(sorted.begin(), sorted.begin() + sorted.size() / 2);
    median = 0.5 * (median + below);
  }
  std::vector<double> folded(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) folded[i] = std::abs(flat[i] - median);
  const std::vector<double> zf = rank_normalize(folded);

  const Chains zc = regroup(z, n_split, half);
  d.rhat = std::max(rhat_of(zc), rhat_of(regroup(zf, n_split, half)));
  d.ess = ess_of(zc);
  return d;
}

std::vector<ParamDiagnostics> diagnostics(const PosteriorDraws& draws) {
  std::vector<ParamDiagnostics> out;
  auto add = [&](const Matrix& m, const std::vector<std::string>& names) {
    for (std::size_t k = 0; k < m.cols(); ++k) {
      const std::vector<double> col = m.column(k);
      out.push_back(diagnose(col, draws.chain_id, names[k]));
    }
  };
  add(draws.gamma, draws.gamma_names);
  add(draws.theta, draws.theta_names);
  return out;
}

bool diagnostics_pass(const std::vector<ParamDiagnostics>& diags) {
  for (const auto& d : diags) {
    if (d.degenerate) continue;
    if (!(d.rhat <= kRhatThreshold) || !(d.ess >= kEssThreshold)) return false;
  }
  return true;
}

std::string diagnostics_table(const std::vector<ParamDiagnostics>& diags) {
  std::ostringstream os;
  os << "parameter  rhat      ess\n";
  for (const auto& d : diags) {
    char line[128];
    std::snprintf(line, sizeof line, "%-10s %-9.4f %.0f%s\n", d.name.c_str(), d.rhat, d.ess,
                  d.degenerate ? "  (degenerate)" : "");
    os << line;
  }
  return os.str();
}

void require_converged(const PosteriorDraws& draws) {
  if (!draws.converged)
    throw ConvergenceError("MCMC did not converge (R-hat > " + std::to_string(kRhatThreshold).substr(0, 4) +
                           " or ESS < 400):\n" + diagnostics_table(draws.diagnostics));
}

bool metropolis_accept(double log_ratio, Philox4x32& rng) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(uniform01(rng)) < log_ratio;
}

PosteriorDraws sample_extended(const SensitivityModel& model, const ChainConfig& cfg) {
  cfg.validate();
  const std::size_t gdim = model.gamma_dim();
  const std::size_t tdim = model.theta_dim();
  const Box gbox = model.hyper_prior().bounds;
  const Box tbox = model.theta_domain();
  const std::vector<double> theta0 = model.initial_theta();
  const std::vector<double> theta_scale = model.theta_scale();

  auto body = [&](int chain, ChainOutput& out) {
    Philox4x32 rng(cfg.seed, static_cast<std::uint64_t>(chain));
    std::vector<double> gamma(gdim);
    for (std::size_t k = 0; k < gdim; ++k)
      gamma[k] = gbox[k].lower + gbox[k].width() * (0.25 + 0.5 * uniform01(rng));
    std::vector<double> theta(theta0);
    for (std::size_t k = 0; k < tdim; ++k) {
      const double proposal = theta0[k] + 0.1 * theta_scale[k] * std_normal(rng);
      if (tbox[k].contains_open(proposal)) theta[k] = proposal;
    }

    Adapter adapt{std::vector<double>(gdim + tdim), cfg.target_accept, cfg.adapt_window};
    for (std::size_t k = 0; k < gdim; ++k) adapt.log_scale[k] = std::log(0.25 * gbox[k].width());
    for (std::size_t k = 0; k < tdim; ++k) adapt.log_scale[gdim + k] = std::log(theta_scale[k]);

    double ll = model.log_likelihood(theta);
    double lp = model.log_conditional_prior(theta, gamma);
    double lh = model.log_hyper_prior(gamma);

    const int total = cfg.n_warmup + cfg.n_keep * cfg.thin;
    out.gamma.reserve(static_cast<std::size_t>(cfg.n_keep) * gdim);
    out.theta.reserve(static_cast<std::size_t>(cfg.n_keep) * tdim);
    for (int it = 0; it < total; ++it) {
      const bool warmup = it < cfg.n_warmup;
      for (int sub = 0; sub < cfg.gamma_substeps; ++sub)
      for (std::size_t k = 0; k < gdim; ++k) {
        const double old = gamma[k];
        const double prop = old + adapt.scale(k) * std_normal(rng);
        bool accepted = false;
        if (gbox[k].contains_open(prop)) {
          gamma[k] = prop;
          const double lp_new = model.log_conditional_prior(theta, gamma);
          const double lh_new = model.log_hyper_prior(gamma);
          accepted = metropolis_accept(lp_new + lh_new - lp - lh, rng);
          if (accepted) {
            lp = lp_new;
            lh = lh_new;
          } else {
            gamma[k] = old;
          }
        }
        if (warmup) adapt.update(k, accepted, it * cfg.gamma_substeps + sub);
      }
      for (std::size_t k = 0; k < tdim; ++k) {
        const double old = theta[k];
        const double prop = old + adapt.scale(gdim + k) * std_normal(rng);
        bool accepted = false;
        if (tbox[k].contains_open(prop)) {
          theta[k] = prop;
          const double ll_new = model.log_likelihood(theta);
          const double lp_new = model.log_conditional_prior(theta, gamma);
          accepted = metropolis_accept(ll_new + lp_new - ll - lp, rng);
          if (accepted) {
            ll = ll_new;
            lp = lp_new;
          } else {
            theta[k] = old;
          }
        }
        if (warmup) adapt.update(gdim + k, accepted, it);
      }
      if (!warmup && (it - cfg.n_warmup) % cfg.thin == 0) {
        out.gamma.insert(out.gamma.end(), gamma.begin(), gamma.end());
        out.theta.insert(out.theta.end(), theta.begin(), theta.end());
      }
    }
  };

  std::vector<ChainOutput> chains;
  run_chains(cfg.n_chains, body, chains);
  PosteriorDraws d = merge(chains, gdim, tdim, cfg.n_keep, false);
  d.gamma_names = model.gamma_names();
  d.theta_names = model.theta_names();
  d.diagnostics = diagnostics(d);
  d.converged = diagnostics_pass(d.diagnostics);
  return d;
}

void ProductSpaceSpec::validate() const {
  if (!(p_fe > 0.0) || !(p_re > 0.0) || std::abs(p_fe + p_re - 1.0) > 1e-9)
    throw ValidationError("product-space component probabilities must be positive and sum to 1");
  if (pseudo_prior) pseudo_prior->validate();
  if (pilot_keep < 1000) throw ValidationError("pilot_keep must be at least 1000");
}

HeterogeneityPrior moment_matched_inverse_gamma(std::span<const double> tau) {
  if (tau.size() < 2) throw ValidationError("moment matching needs at least two draws");
  const double n = static_cast<double>(tau.size());
  const double mean = std::accumulate(tau.begin(), tau.end(), 0.0) / n;
  double ss = 0.0;
  for (double t : tau) ss += (t - mean) * (t - mean);
  const double var = ss / (n - 1.0);
  if (!(mean > 0.0) || !(var > 0.0)) throw ValidationError("moment matching needs positive, varying draws");
  const double shape = mean * mean / var + 2.0;
  return {shape, mean * (shape - 1.0)};
}

PosteriorDraws sample_product_space(const ProductSpaceSpec& spec, const MetaData& data,
                                    const HeterogeneityPrior& tau_prior, const HyperPrior& hyper,
                                    const ChainConfig& cfg, HeterogeneityPrior* pseudo_used) {
  spec.validate();
  cfg.validate();
  data.validate();
  tau_prior.validate();
  if (hyper.dim() != 1) throw ValidationError("product-space sampler takes a one-dimensional hyper-prior");

  HeterogeneityPrior pseudo;
  if (spec.pseudo_prior) {
    pseudo = *spec.pseudo_prior;
  } else {
    ChainConfig pilot_cfg = cfg;
    pilot_cfg.n_keep = spec.pilot_keep;
    pilot_cfg.seed = cfg.seed ^ 0x9E3779B97F4A7C15ull;
    const MetaAlternativeModel re(data, tau_prior, hyper, MetaStructure::RandomEffects);
    const PosteriorDraws pilot = sample_extended(re, pilot_cfg);
    pseudo = moment_matched_inverse_gamma(pilot.theta.column(1));
  }
  if (pseudo_used) *pseudo_used = pseudo;

  const Interval sbox = hyper.bounds[0];
  const double log_p_fe = std::log(spec.p_fe);
  const double log_p_re = std::log(spec.p_re);
  const auto [mu_hat, mu_se] = [&] {
    double w = 0.0, wy = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double wi = 1.0 / (data.ses[i] * data.ses[i]);
      w += wi;
      wy += wi * data.effects[i];
    }
    return std::pair{wy / w, 1.0 / std::sqrt(w)};
  }();

  auto body = [&](int chain, ChainOutput& out) {
    Philox4x32 rng(cfg.seed, static_cast<std::uint64_t>(chain));
    boost::random::gamma_distribution<double> pseudo_gamma(pseudo.shape, 1.0);
    auto draw_pseudo = [&] { return pseudo.scale / pseudo_gamma(rng); };

    double sigma = sbox.lower + sbox.width() * (0.25 + 0.5 * uniform01(rng));
    double mu = mu_hat + 0.1 * mu_se * std_normal(rng);
    int z = chain % 2;
    double tau = z == 1 ? tau_prior.quantile(0.5) : draw_pseudo();

    // Coordinates: 0 = sigma_mu, 1 = mu, 2 = log(tau) while z = RE.
    Adapter adapt{{std::log(0.25 * sbox.width()), std::log(mu_se), std::log(0.5)},
                  cfg.target_accept, cfg.adapt_window};
    auto log_mu_prior = [&](double m, double s) {
      return normal_logpdf(m, 0.0, s) + hyper.logpdf(std::span<const double>(&s, 1));
    };
    auto loglik = [&](double m, double t) { return meta_loglik(data, m, z == 1 ? t : 0.0); };

    double ll = loglik(mu, tau);
    const int total = cfg.n_warmup + cfg.n_keep * cfg.thin;
    int re_updates = 0;
    for (int it = 0; it < total; ++it) {
      const bool warmup = it < cfg.n_warmup;

      // sigma_mu: only the prior on mu and the hyper-prior involve it.
      {
        const double prop = sigma + adapt.scale(0) * std_normal(rng);
        bool accepted = false;
        if (sbox.contains_open(prop)) {
          accepted = metropolis_accept(log_mu_prior(mu, prop) - log_mu_prior(mu, sigma), rng);
          if (accepted) sigma = prop;
        }
        if (warmup) adapt.update(0, accepted, it);
      }
      {
        const double prop = mu + adapt.scale(1) * std_normal(rng);
        const double ll_new = loglik(prop, tau);
        const bool accepted = metropolis_accept(
            ll_new + normal_logpdf(prop, 0.0, sigma) - ll - normal_logpdf(mu, 0.0, sigma), rng);
        if (accepted) {
          mu = prop;
          ll = ll_new;
        }
        if (warmup) adapt.update(1, accepted, it);
      }
      if (z == 1) {
        const double u = std::log(tau);
        const double prop_u = u + adapt.scale(2) * std_normal(rng);
        const double prop = std::exp(prop_u);
        bool accepted = false;
        if (prop > 0.0 && std::isfinite(prop)) {
          const double ll_new = loglik(mu, prop);
          accepted = metropolis_accept(
              ll_new + tau_prior.logpdf(prop) + prop_u - ll - tau_prior.logpdf(tau) - u, rng);
          if (accepted) {
            tau = prop;
            ll = ll_new;
          }
        }
        if (warmup) adapt.update(2, accepted, re_updates++);
      } else {
        tau = draw_pseudo();
      }

      // Indicator: Gibbs step over its full conditional.
      const double lw_fe = log_p_fe + meta_loglik(data, mu, 0.0) + pseudo.logpdf(tau);
      const double lw_re = log_p_re + meta_loglik(data, mu, tau) + tau_prior.logpdf(tau);
      const double p_re = 1.0 / (1.0 + std::exp(lw_fe - lw_re));
      z = uniform01(rng) < p_re ? 1 : 0;
      ll = loglik(mu, tau);

      if (!warmup && (it - cfg.n_warmup) % cfg.thin == 0) {
        out.gamma.push_back(sigma);
        out.theta.push_back(mu);
        out.theta.push_back(tau);
        out.indicator.push_back(z);
      }
    }
  };

  std::vector<ChainOutput> chains;
  run_chains(cfg.n_chains, body, chains);
  PosteriorDraws d = merge(chains, 1, 2, cfg.n_keep, true);
  d.gamma_names = {"sigma_mu"};
  d.theta_names = {"mu", "tau"};
  d.diagnostics = diagnostics(d);
  d.converged = diagnostics_pass(d.diagnostics);
  for (const auto& c : chains) {
    const auto [lo, hi] = std::minmax_element(c.indicator.begin(), c.indicator.end());
    if (*lo == *hi) d.mixed = false;
  }
  return d;
}

void write_draws_csv(std::ostream& out, const PosteriorDraws& d) {
  out << "chain,iteration";
  for (const auto& n : d.gamma_names) out << ',' << n;
  for (const auto& n : d.theta_names) out << ',' << n;
  if (d.indicator) out << ",indicator";
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << d.chain_id[i] << ',' << d.iteration[i];
    for (std::size_t k = 0; k < d.gamma.cols(); ++k) out << ',' << csv::format_double(d.gamma(i, k));
    for (std::size_t k = 0; k < d.theta.cols(); ++k) out << ',' << csv::format_double(d.theta(i, k));
    if (d.indicator) out << ',' << (*d.indicator)[i];
    out << '\n';
  }
}

PosteriorDraws read_draws_csv(std::istream& in, std::size_t gamma_dim) {
  const csv::Table t = csv::read(in);
  if (t.header.size() < 2 + gamma_dim || t.header[0] != "chain" || t.header[1] != "iteration")
    throw ValidationError("draws CSV must start with chain,iteration followed by the gamma columns");
  const bool has_indicator = t.header.back() == "indicator";
  const std::size_t tdim = t.header.size() - 2 - gamma_dim - (has_indicator ? 1 : 0);
  PosteriorDraws d;
  d.gamma_names.assign(t.header.begin() + 2, t.header.begin() + 2 + gamma_dim);
  d.theta_names.assign(t.header.begin() + 2 + gamma_dim, t.header.begin() + 2 + gamma_dim + tdim);
  d.gamma = Matrix(t.rows.size(), gamma_dim);
  d.theta = Matrix(t.rows.size(), tdim);
  if (has_indicator) d.indicator.emplace();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = "draws row " + std::to_string(r + 1);
    d.chain_id.push_back(static_cast<int>(csv::parse_int(row[0], ctx)));
    d.iteration.push_back(static_cast<int>(csv::parse_int(row[1], ctx)));
    for (std::size_t k = 0; k < gamma_dim; ++k) d.gamma(r, k) = csv::parse_double(row[2 + k], ctx);
    for (std::size_t k = 0; k < tdim; ++k) d.theta(r, k) = csv::parse_double(row[2 + gamma_dim + k], ctx);
    if (has_indicator) d.indicator->push_back(static_cast<int>(csv::parse_int(row.back(), ctx)));
  }
  return d;
}

}  // namespace bfsens
