#include "tailcast/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "tailcast/detail/nelder_mead.hpp"
#include "tailcast/error.hpp"
#include "tailcast/random.hpp"

namespace tailcast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double lower_gamma_bound(ModelKind kind) { return kind == ModelKind::Continuous ? -0.5 : 0.0; }

// -log L at (gamma, sigma); +inf for invalid parameters or out-of-support data.
double neg_loglik(double gamma, double sigma, const ExceedanceSet& exc) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(gamma)) return kInf;
  if (exc.kind == ModelKind::Discrete && gamma < 0.0) return kInf;
  const double ll = loglik(ModelParams(gamma, sigma, exc.kind), exc.excesses);
  return std::isfinite(ll) ? -ll : kInf;
}

std::vector<std::array<double, 2>> starting_points(const ExceedanceSet& exc) {
  const auto& x = exc.excesses;  // ascending
  const double k = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / k;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (k - 1.0);

  double a1 = 0.0;  // probability-weighted moment E[X (1 - F(X))]
  for (std::size_t j = 0; j < x.size(); ++j) {
    a1 += x[j] * (k - 1.0 - static_cast<double>(j)) / (k - 1.0);
  }
  a1 /= k;

  const double lb = lower_gamma_bound(exc.kind);
  auto clamp_start = [&](double g, double s) -> std::array<double, 2> {
    if (!std::isfinite(g) || !std::isfinite(s) || s <= 0.0) return {0.0, mean};
    g = std::clamp(g, lb + 0.05, 2.0);
    if (g < 0.0) s = std::max(s, -g * x.back() * 1.05);
    return {g, s};
  };

  std::vector<std::array<double, 2>> starts;
  const double r = mean * mean / var;
  starts.push_back(clamp_start(0.5 * (1.0 - r), 0.5 * mean * (1.0 + r)));
  const double denom = mean - 2.0 * a1;
  if (denom > 0.0) starts.push_back(clamp_start(2.0 - mean / denom, 2.0 * mean * a1 / denom));
  starts.push_back({exc.kind == ModelKind::Discrete ? 0.05 : 0.0,
                    exc.kind == ModelKind::Discrete ? mean + 0.5 : mean});
  return starts;
}

// Observed information of -log L in (gamma, sigma) by central differences.
// The gamma stencil is shifted off the lower bound for discrete fits.
Cov2 inverse_observed_information(double gamma, double sigma, const ExceedanceSet& exc) {
  const double hg = 1e-4 * std::max(1.0, std::fabs(gamma));
  const double hs = 1e-4 * sigma;
  const double gc = exc.kind == ModelKind::Discrete ? std::max(gamma, 1.0001 * hg) : gamma;
  auto f = [&](double g, double s) { return neg_loglik(g, s, exc); };
  const double f0 = f(gc, sigma);
  const double fgg = (f(gc + hg, sigma) - 2.0 * f0 + f(gc - hg, sigma)) / (hg * hg);
  const double fss = (f(gc, sigma + hs) - 2.0 * f0 + f(gc, sigma - hs)) / (hs * hs);
  const double fgs = (f(gc + hg, sigma + hs) - f(gc + hg, sigma - hs) - f(gc - hg, sigma + hs) +
                      f(gc - hg, sigma - hs)) /
                     (4.0 * hg * hs);
  const double det = fgg * fss - fgs * fgs;
  if (!std::isfinite(det) || fgg <= 0.0 || det <= 0.0) return {kNaN, kNaN, kNaN};
  return {fss / det, -fgs / det, fgg / det};
}

}  // namespace

MlFit ml_fit(const ExceedanceSet& exc) {
  if (exc.k < 5 || exc.excesses.size() != exc.k) {
    throw InvalidInput("ml_fit: need at least 5 exceedances");
  }
  const auto& x = exc.excesses;
  if (x.front() == x.back()) {
    throw FitFailure("ml_fit: all excesses are equal, likelihood is degenerate", 0.0,
                     std::max(x.front(), 1e-300));
  }

  auto objective = [&](const std::array<double, 2>& p) {
    if (p[0] <= lower_gamma_bound(exc.kind) && exc.kind == ModelKind::Continuous) return kInf;
    if (p[0] < 0.0 && exc.kind == ModelKind::Discrete) return kInf;
    return neg_loglik(p[0], std::exp(p[1]), exc);
  };

  detail::NelderMeadResult best;
  std::size_t evals = 0;
  for (const auto& s : starting_points(exc)) {
    const std::array<double, 2> start = {s[0], std::log(s[1])};
    if (!std::isfinite(objective(start))) continue;
    auto res = detail::nelder_mead(objective, start, {0.1, 0.2});
    evals += res.evaluations;
    if (res.f < best.f) best = res;
  }
  if (!std::isfinite(best.f)) {
    throw FitFailure("ml_fit: no feasible starting point", kNaN, kNaN);
  }
  // A restart from the best vertex guards against simplex collapse.
  auto polished = detail::nelder_mead(objective, best.x, {0.02, 0.05});
  evals += polished.evaluations;
  if (polished.f <= best.f) best = polished;
  if (!best.converged) {
    throw FitFailure("ml_fit: optimizer did not converge", best.x[0], std::exp(best.x[1]));
  }

  const double gamma = best.x[0];
  const double sigma = std::exp(best.x[1]);
  const Cov2 cov = inverse_observed_information(gamma, sigma, exc);
  return MlFit{ModelParams(gamma, sigma, exc.kind),
               std::sqrt(cov.gg),
               std::sqrt(cov.ss),
               cov,
               -best.f,
               gamma < lower_gamma_bound(exc.kind) + 1e-4,
               evals};
}

double ShapePrior::log_density(double gamma) const {
  if (!(gamma > lower) || !std::isfinite(gamma)) return -kInf;
  const double z = (gamma - location) / scale;
  const double zl = (lower - location) / scale;
  if (family == Family::StudentT) {
    const boost::math::students_t_distribution<double> t(df);
    return std::log(boost::math::pdf(t, z) / scale) - std::log(boost::math::cdf(boost::math::complement(t, zl)));
  }
  const boost::math::normal_distribution<double> nd(0.0, 1.0);
  return std::log(boost::math::pdf(nd, z) / scale) - std::log(boost::math::cdf(boost::math::complement(nd, zl)));
}

double ShapePrior::density(double gamma) const { return std::exp(log_density(gamma)); }

double ScalePrior::log_density(double sigma, double sigma_hat) const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) return -kInf;
  const double u = sigma / sigma_hat;
  const double a = shape;
  if (family == Family::Gamma) {
    return (a - 1.0) * std::log(u) - u - std::lgamma(a) - std::log(sigma_hat);
  }
  return std::log(a) + (a - 1.0) * std::log(u) - std::pow(u, a) - std::log(sigma_hat);
}

double PriorSpec::log_density(double gamma, double sigma) const {
  return shape.log_density(gamma) + scale.log_density(sigma, sigma_hat);
}

PriorSpec default_prior(const MlFit& fit) {
  PriorSpec prior;
  prior.sigma_hat = fit.params.sigma();
  return prior;
}

PriorSpec default_prior(const ExceedanceSet& exc) { return default_prior(ml_fit(exc)); }

double log_posterior_unnorm(const ModelParams& params, const ExceedanceSet& exc,
                            const PriorSpec& prior) {
  const double lp = prior.log_density(params.gamma(), params.sigma());
  if (lp == -kInf) return -kInf;
  const double ll = loglik(params, exc.excesses);
  if (ll == -kInf) return -kInf;
  return ll + lp;
}

std::vector<double> PosteriorDraws::gammas() const {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d.gamma());
  return out;
}

std::vector<double> PosteriorDraws::sigmas() const {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d.sigma());
  return out;
}

namespace {

// Log target in (gamma, eta = log sigma), including the Jacobian sigma.
double log_target(double gamma, double eta, const ExceedanceSet& exc, const PriorSpec& prior) {
  if (!std::isfinite(gamma) || !std::isfinite(eta)) return -kInf;
  if (exc.kind == ModelKind::Discrete && gamma < 0.0) return -kInf;
  const double sigma = std::exp(eta);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) return -kInf;
  const double lp = log_posterior_unnorm(ModelParams(gamma, sigma, exc.kind), exc, prior);
  return lp == -kInf ? -kInf : lp + eta;
}

struct Chol2 {
  double l11, l21, l22;
};

Chol2 cholesky(double a, double b, double c) {
  const double l11 = std::sqrt(a);
  const double l21 = b / l11;
  return {l11, l21, std::sqrt(std::max(c - l21 * l21, 1e-300))};
}

struct ChainOutput {
  std::vector<ModelParams> draws;
  std::size_t accepted = 0;
  std::size_t iterations = 0;
  std::size_t longest_rejection_run = 0;
};

constexpr std::size_t kRejectionWarnRun = 1000;

ChainOutput run_chain(const ExceedanceSet& exc, const PriorSpec& prior, const McmcOptions& opt,
                      std::uint64_t stream) {
  Rng rng = make_rng(opt.seed, stream);

  double gamma0 = 0.1;
  double sigma0 = prior.sigma_hat;
  Cov2 prop{0.01, 0.0, 0.01};  // (gamma, eta)
  if (opt.start) {
    gamma0 = opt.start->gamma();
    sigma0 = opt.start->sigma();
  } else {
    try {
      const MlFit fit = ml_fit(exc);
      gamma0 = fit.params.gamma();
      sigma0 = fit.params.sigma();
      if (exc.kind == ModelKind::Discrete) gamma0 = std::max(gamma0, 1e-3);
      if (std::isfinite(fit.cov.gg) && fit.cov.gg > 0 && fit.cov.ss > 0) {
        prop = {fit.cov.gg, fit.cov.gs / sigma0, fit.cov.ss / (sigma0 * sigma0)};
      }
    } catch (const FitFailure&) {
    }
  }
  double x0 = gamma0;
  double x1 = std::log(sigma0);
  double lp = log_target(x0, x1, exc, prior);
  if (lp == -kInf) {
    throw InvalidInput("mcmc_sample: starting point has zero posterior density");
  }

  // Burn-in adaptation: running moments of the chain and a Robbins-Monro scale.
  double log_scale = std::log(2.38 * 2.38 / 2.0);
  double m0 = 0.0, m1 = 0.0, s00 = 0.0, s01 = 0.0, s11 = 0.0;
  std::size_t nobs = 0;
  Chol2 chol = cholesky(std::exp(log_scale) * prop.gg, std::exp(log_scale) * prop.gs,
                        std::exp(log_scale) * prop.ss);

  ChainOutput out;
  out.draws.reserve(opt.draws);
  const std::size_t total = opt.burnin + opt.draws * opt.thin;
  std::size_t run = 0;
  for (std::size_t it = 0; it < total; ++it) {
    const double z0 = standard_normal(rng);
    const double z1 = standard_normal(rng);
    const double y0 = x0 + chol.l11 * z0;
    const double y1 = x1 + chol.l21 * z0 + chol.l22 * z1;
    const double lq = log_target(y0, y1, exc, prior);
    const double u = uniform_open(rng);
    const bool accept = lq > -kInf && std::log(u) < lq - lp;
    if (accept) {
      x0 = y0;
      x1 = y1;
      lp = lq;
      run = 0;
    } else {
      out.longest_rejection_run = std::max(out.longest_rejection_run, ++run);
    }

    if (it < opt.burnin) {
      ++nobs;
      const double d0 = x0 - m0, d1 = x1 - m1;
      m0 += d0 / static_cast<double>(nobs);
      m1 += d1 / static_cast<double>(nobs);
      s00 += d0 * (x0 - m0);
      s01 += d0 * (x1 - m1);
      s11 += d1 * (x1 - m1);
      log_scale += ((accept ? 1.0 : 0.0) - opt.target_acceptance) /
                   std::pow(static_cast<double>(it) + 1.0, 0.6);
      log_scale = std::clamp(log_scale, -12.0, 6.0);
      Cov2 c = prop;
      if (nobs >= 200) {
        const double inv = 1.0 / static_cast<double>(nobs - 1);
        c = {s00 * inv + 1e-10, s01 * inv, s11 * inv + 1e-10};
        if (c.gg * c.ss - c.gs * c.gs <= 0.0) c = prop;
      }
      const double lam = std::exp(log_scale);
      chol = cholesky(lam * c.gg, lam * c.gs, lam * c.ss);
      continue;
    }
    ++out.iterations;
    if (accept) ++out.accepted;
    if ((it - opt.burnin + 1) % opt.thin == 0) {
      out.draws.emplace_back(x0, std::exp(x1), exc.kind);
    }
  }
  return out;
}

std::vector<double> autocorrelation_pairs_sum(std::span<const double> x, double mean, double var) {
  const std::size_t n = x.size();
  std::vector<double> rho;
  for (std::size_t lag = 0; lag < n / 2; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += (x[i] - mean) * (x[i + lag] - mean);
    rho.push_back(acc / (static_cast<double>(n) * var));
    if (lag % 2 == 1 && rho[lag - 1] + rho[lag] < 0.0) break;
  }
  return rho;
}

ChainDiagnostics diagnose(const std::vector<std::vector<double>>& gamma_chains,
                          const std::vector<std::vector<double>>& eta_chains) {
  ChainDiagnostics d;
  for (std::size_t c = 0; c < gamma_chains.size(); ++c) {
    d.ess_gamma += effective_sample_size(gamma_chains[c]);
    d.ess_log_sigma += effective_sample_size(eta_chains[c]);
  }
  d.rhat_gamma = split_rhat(gamma_chains);
  d.rhat_log_sigma = split_rhat(eta_chains);
  return d;
}

}  // namespace

double effective_sample_size(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : chain) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (var <= 0.0) return static_cast<double>(n);
  const auto rho = autocorrelation_pairs_sum(chain, mean, var);
  // Initial monotone sequence: pair sums Gamma_m = rho_2m + rho_2m+1.
  double tau = -1.0;
  double prev = kInf;
  for (std::size_t m = 0; 2 * m + 1 < rho.size(); ++m) {
    double pair = rho[2 * m] + rho[2 * m + 1];
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    prev = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
  return std::min(static_cast<double>(n) / tau, static_cast<double>(n) * std::log10(static_cast<double>(n)));
}

double split_rhat(std::span<const std::vector<double>> chains) {
  std::vector<std::span<const double>> halves;
  std::size_t len = std::numeric_limits<std::size_t>::max();
  for (const auto& c : chains) len = std::min(len, c.size() / 2);
  if (chains.empty() || len < 2) return kNaN;
  for (const auto& c : chains) {
    halves.emplace_back(c.data(), len);
    halves.emplace_back(c.data() + c.size() - len, len);
  }
  const double n = static_cast<double>(len);
  const double m = static_cast<double>(halves.size());
  std::vector<double> means;
  double w = 0.0;
  for (const auto& h : halves) {
    const double mu = std::accumulate(h.begin(), h.end(), 0.0) / n;
    double s2 = 0.0;
    for (double v : h) s2 += (v - mu) * (v - mu);
    w += s2 / (n - 1.0);
    means.push_back(mu);
  }
  w /= m;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b = b * n / (m - 1.0);
  if (w <= 0.0) return kNaN;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

PosteriorDraws mcmc_sample_chains(const ExceedanceSet& exc, const PriorSpec& prior,
                                  const McmcOptions& options, std::size_t chains) {
  if (options.draws < 1) throw InvalidInput("mcmc_sample: need at least one draw");
  if (options.thin < 1) throw InvalidInput("mcmc_sample: thinning must be >= 1");
  if (chains < 1) throw InvalidInput("mcmc_sample: need at least one chain");
  if (!(prior.sigma_hat > 0.0)) throw InvalidInput("mcmc_sample: prior sigma_hat must be > 0");

  PosteriorDraws post;
  post.kind = exc.kind;
  post.burnin = options.burnin;
  post.thin = options.thin;
  post.chains = chains;
  post.seed = options.seed;

  std::vector<std::vector<double>> gamma_chains, eta_chains;
  std::size_t accepted = 0, iterations = 0;
  for (std::size_t c = 0; c < chains; ++c) {
    ChainOutput out = run_chain(exc, prior, options, c);
    accepted += out.accepted;
    iterations += out.iterations;
    if (out.longest_rejection_run >= kRejectionWarnRun) {
      post.warnings.push_back("chain " + std::to_string(c) + ": " +
                              std::to_string(out.longest_rejection_run) +
                              " consecutive rejections; proposal adaptation may have failed");
    }
    std::vector<double> g, e;
    for (const auto& d : out.draws) {
      g.push_back(d.gamma());
      e.push_back(std::log(d.sigma()));
    }
    gamma_chains.push_back(std::move(g));
    eta_chains.push_back(std::move(e));
    post.draws.insert(post.draws.end(), out.draws.begin(), out.draws.end());
  }
  post.acceptance_rate =
      iterations ? static_cast<double>(accepted) / static_cast<double>(iterations) : 0.0;
  post.diagnostics = diagnose(gamma_chains, eta_chains);
  return post;
}

PosteriorDraws mcmc_sample(const ExceedanceSet& exc, const PriorSpec& prior,
                           const McmcOptions& options) {
  return mcmc_sample_chains(exc, prior, options, 1);
}

PosteriorDraws mcmc_sample(const ExceedanceSet& exc, const PriorSpec& prior, std::size_t draws,
                           std::size_t burnin, std::uint64_t seed) {
  McmcOptions opt;
  opt.draws = draws;
  opt.burnin = burnin;
  opt.seed = seed;
  return mcmc_sample(exc, prior, opt);
}

double extreme_quantile(const ModelParams& params, double threshold, double tau_star) {
  if (!(tau_star > 0.0 && tau_star <= 1.0)) {
    throw InvalidInput("extreme quantile: tau_star must lie in (0, 1]");
  }
  const double g = params.gamma();
  const double lt = std::log(tau_star);
  const double a = std::fabs(g) < kZeroGammaTol ? -params.sigma() * lt
                                                : params.sigma() * std::expm1(-g * lt) / g;
  if (params.kind() == ModelKind::Continuous) return threshold + a;
  return threshold + std::floor(a) - 1.0;
}

std::vector<double> posterior_extreme_quantile(const PosteriorDraws& post, const ExceedanceSet& exc,
                                               double tau_star) {
  if (!(tau_star > 0.0 && tau_star <= 1.0)) {
    throw InvalidInput("posterior_extreme_quantile: tau_star must lie in (0, 1]");
  }
  std::vector<double> out;
  out.reserve(post.size());
  for (const auto& d : post.draws) out.push_back(extreme_quantile(d, exc.threshold, tau_star));
  return out;
}

double sorted_quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> draws, double level) {
  if (draws.empty()) throw InvalidInput("summarize: empty draws");
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("summarize: level must lie in (0, 1)");
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  const double tail = (1.0 - level) / 2.0;
  return {mean, sorted_quantile(sorted, tail), sorted_quantile(sorted, 1.0 - tail)};
}

}  // namespace tailcast
