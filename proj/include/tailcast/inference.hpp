#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailcast/tail_models.hpp"
#include "tailcast/threshold.hpp"

namespace tailcast {

/// Symmetric 2x2 covariance of (gamma, sigma).
struct Cov2 {
  double gg = 0.0;
  double gs = 0.0;
  double ss = 0.0;
};

struct MlFit {
  ModelParams params;
  double se_gamma;
  double se_sigma;
  Cov2 cov;  ///< inverse observed information at the optimum
  double loglik;
  bool boundary;  ///< optimum within 1e-4 of the lower gamma bound
  std::size_t evaluations;
};

/// Maximum likelihood over gamma > -1/2 (continuous) or gamma >= 0
/// (discrete), sigma > 0. Nelder-Mead on (gamma, log sigma) started from the
/// moment, probability-weighted-moment and exponential points.
/// Throws FitFailure on a degenerate likelihood or when no start converges.
[[nodiscard]] MlFit ml_fit(const ExceedanceSet& exc);

/// Shape prior truncated to (lower, inf) and renormalized by the truncation mass.
struct ShapePrior {
  enum class Family { StudentT, Normal };
  Family family = Family::StudentT;
  double df = 1.0;  ///< StudentT only
  double location = 0.0;
  double scale = 1.0;
  double lower = -1.0;

  [[nodiscard]] double log_density(double gamma) const;
  [[nodiscard]] double density(double gamma) const;
};

/// Base density pi on the unit scale; the prior on sigma is pi(sigma/s)/s.
struct ScalePrior {
  enum class Family { Gamma, Weibull };
  Family family = Family::Gamma;
  double shape = 1.0;

  [[nodiscard]] double log_density(double sigma, double sigma_hat) const;
};

struct PriorSpec {
  ShapePrior shape;
  ScalePrior scale;
  double sigma_hat = 1.0;

  [[nodiscard]] double log_density(double gamma, double sigma) const;
};

/// Truncated Cauchy (Student-t, 1 df) on gamma > -1 and a unit-shape gamma
/// scale prior centred by the ML scale estimate.
[[nodiscard]] PriorSpec default_prior(const ExceedanceSet& exc);
[[nodiscard]] PriorSpec default_prior(const MlFit& fit);

/// log L(theta) + log pi(theta); -inf outside the support of either factor.
[[nodiscard]] double log_posterior_unnorm(const ModelParams& params, const ExceedanceSet& exc,
                                          const PriorSpec& prior);

struct McmcOptions {
  std::size_t draws = 20000;
  std::size_t burnin = 5000;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  double target_acceptance = 0.234;
  /// Starting point; the ML estimate is used when absent.
  std::optional<ModelParams> start;
};

struct ChainDiagnostics {
  double ess_gamma = 0.0;
  double ess_log_sigma = 0.0;
  double rhat_gamma = 0.0;  ///< split-chain potential scale reduction
  double rhat_log_sigma = 0.0;
};

struct PosteriorDraws {
  std::vector<ModelParams> draws;
  ModelKind kind = ModelKind::Continuous;
  double acceptance_rate = 0.0;
  std::size_t burnin = 0;
  std::size_t thin = 1;
  std::size_t chains = 1;
  std::uint64_t seed = 0;
  ChainDiagnostics diagnostics;
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t size() const noexcept { return draws.size(); }
  [[nodiscard]] std::vector<double> gammas() const;
  [[nodiscard]] std::vector<double> sigmas() const;
};

/// Adaptive random-walk Metropolis on (gamma, log sigma). The bivariate
/// normal proposal covariance tracks the chain covariance during burn-in with
/// its scale tuned toward the target acceptance rate, then stays frozen.
[[nodiscard]] PosteriorDraws mcmc_sample(const ExceedanceSet& exc, const PriorSpec& prior,
                                         const McmcOptions& options);
[[nodiscard]] PosteriorDraws mcmc_sample(const ExceedanceSet& exc, const PriorSpec& prior,
                                         std::size_t draws, std::size_t burnin, std::uint64_t seed);

/// Runs `chains` independent chains (seed streams 0..chains-1 of
/// options.seed), concatenates them in chain order and reports split-chain
/// diagnostics across all of them.
[[nodiscard]] PosteriorDraws mcmc_sample_chains(const ExceedanceSet& exc, const PriorSpec& prior,
                                                const McmcOptions& options, std::size_t chains);

/// Effective sample size from the initial monotone sequence estimator.
[[nodiscard]] double effective_sample_size(std::span<const double> chain);
/// Split-R-hat over equally long chains (each is split in half).
[[nodiscard]] double split_rhat(std::span<const std::vector<double>> chains);

/// Extreme quantile t + sigma((tau*)^-gamma - 1)/gamma for one parameter
/// draw (discrete: floored, minus one).
[[nodiscard]] double extreme_quantile(const ModelParams& params, double threshold,
                                      double tau_star);

/// Extreme-quantile draw for every posterior draw, tau_star in (0, 1].
[[nodiscard]] std::vector<double> posterior_extreme_quantile(const PosteriorDraws& post,
                                                             const ExceedanceSet& exc,
                                                             double tau_star);

struct Summary {
  double mean;
  double lo;
  double hi;
};

/// Mean and equal-tailed interval; quantiles interpolate linearly between
/// order statistics (R type 7).
[[nodiscard]] Summary summarize(std::span<const double> draws, double level = 0.95);

/// Linear-interpolation quantile of a sorted sample.
[[nodiscard]] double sorted_quantile(std::span<const double> sorted, double prob);

}  // namespace tailcast
