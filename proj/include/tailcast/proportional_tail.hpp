#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tailcast/inference.hpp"
#include "tailcast/prediction.hpp"
#include "tailcast/threshold.hpp"

namespace tailcast {

/// Covariates of the k largest responses together with the full covariate
/// sample. Covariates live in [0, 1] (normalized time).
struct ConcomitantSet {
  std::vector<double> xs;      ///< size k
  std::vector<double> all_xs;  ///< size n
};

/// Ties in the response are broken by sample position, matching
/// build_exceedances.
[[nodiscard]] ConcomitantSet concomitants(std::span<const double> xs, std::span<const double> ys,
                                          std::size_t k);

/// Fraction of `all_xs` inside the ball [x - bandwidth, x + bandwidth] (the
/// ball is implicitly clipped to [0, 1]).
[[nodiscard]] double p_hat(double x, std::span<const double> all_xs, double bandwidth);

/// Default total mass of the uniform Dirichlet-process base measure.
[[nodiscard]] inline double default_dp_mass(double bandwidth) { return 5.0 * bandwidth; }

/// Posterior draws of the scedasis c(x) on a grid. Draw i of grid point j is
/// `draws[i * grid.size() + j]`.
struct ScedasisPosterior {
  std::vector<double> grid;
  std::vector<double> draws;
  std::size_t m = 0;
  double bandwidth = 0.0;
  double dp_mass = 0.0;

  [[nodiscard]] double at(std::size_t draw, std::size_t point) const {
    return draws[draw * grid.size() + point];
  }
  /// All draws at one grid point.
  [[nodiscard]] std::vector<double> column(std::size_t point) const;
  /// Index of `x` in the grid; throws InvalidInput when absent.
  [[nodiscard]] std::size_t grid_index(double x) const;
  /// Scedasis identically one, for reducing to the stationary model.
  static ScedasisPosterior constant_one(std::vector<double> grid, std::size_t m);
};

/// Beta one-set marginal of the Dirichlet-process posterior with base
/// measure dp_mass * Uniform[0, 1]: for each grid point x and draw i,
/// W ~ Beta(rho(B) + count_B, rho(B^c) + k - count_B) and c_i(x) = W / p_hat(x).
[[nodiscard]] ScedasisPosterior scedasis_posterior(const ConcomitantSet& con, double bandwidth,
                                                   double dp_mass, std::span<const double> grid,
                                                   std::size_t m, std::uint64_t seed);

struct TestResult {
  double statistic = 0.0;
  double critical_value = 0.0;  ///< at level `alpha`
  double p_value = 1.0;
  double alpha = 0.05;
  std::size_t k = 0;
  std::size_t mc_reps = 0;

  [[nodiscard]] bool reject() const noexcept { return statistic > critical_value; }
};

/// sqrt(k) sup_s |C_k(s) - F_n(s)| between the empirical cdfs of the
/// concomitants and of all covariates.
[[nodiscard]] double ks_statistic(std::span<const double> concomitant_xs,
                                  std::span<const double> all_xs);

/// Kolmogorov-Smirnov-type test of a constant scedasis. The null law is
/// simulated by drawing k covariates without replacement from the full
/// sample; p-value is (1 + #{null >= observed}) / (1 + mc_reps).
[[nodiscard]] TestResult heteroscedasticity_test(const ConcomitantSet& con, std::size_t mc_reps,
                                                 std::uint64_t seed, double alpha = 0.05);

/// Conditional extreme quantile draws at grid point x, pairing posterior draw
/// i with scedasis draw i.
[[nodiscard]] std::vector<double> conditional_quantile_posterior(const PosteriorDraws& post,
                                                                 const ScedasisPosterior& sced,
                                                                 const ExceedanceSet& exc,
                                                                 double tau_star, double x);

struct ConditionalPredictive {
  PredictiveCurve curve;
  std::size_t clamped = 0;  ///< draws whose tau*/c(x) exceeded 1 and was clamped
};

[[nodiscard]] ConditionalPredictive conditional_predictive(const PosteriorDraws& post,
                                                           const ScedasisPosterior& sced,
                                                           const PredictiveSpec& spec, double x,
                                                           std::span<const double> grid);

struct ConditionalInterval {
  Interval interval;
  std::size_t clamped = 0;
};

[[nodiscard]] ConditionalInterval conditional_predictive_interval(const PosteriorDraws& post,
                                                                  const ScedasisPosterior& sced,
                                                                  const PredictiveSpec& spec,
                                                                  double x, double level = 0.95);

}  // namespace tailcast
