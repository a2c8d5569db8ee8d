#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tailcast/inference.hpp"
#include "tailcast/tail_models.hpp"
#include "tailcast/threshold.hpp"

namespace tailcast {

/// Conditioning configuration for tail-event prediction above an extreme
/// threshold t_E >= t_I.
struct PredictiveSpec {
  double tau_i = 0.0;
  double tau_e = 0.0;
  double tau_star = 1.0;   ///< (1 - tau_e) / (1 - tau_i)
  double threshold = 0.0;  ///< t_I estimate, Y_{n-k,n} or Z_{n-k,n}
  ModelKind kind = ModelKind::Continuous;
  /// When set, every draw conditions on this fixed t_E with the
  /// threshold-stable scale sigma + gamma (t_E - t_I). When empty, each draw
  /// conditions on its own implied t_E through the r-map.
  std::optional<double> conditioning_threshold;

  static PredictiveSpec from_levels(double tau_i, double tau_e, double threshold, ModelKind kind);
  static PredictiveSpec from_exceedances(const ExceedanceSet& exc, double tau_e);
};

/// Threshold-stability map offset * tau*^gamma - sigma (1 - tau*^gamma) / gamma,
/// with limit offset + sigma log tau* at gamma = 0.
[[nodiscard]] double r_map(const ModelParams& params, double offset, double tau_star);

[[nodiscard]] double predictive_cdf_given_theta(const ModelParams& params,
                                                const PredictiveSpec& spec, double y);
/// Includes the change-of-variables factor tau*^gamma, so it integrates to 1.
[[nodiscard]] double predictive_pdf_given_theta(const ModelParams& params,
                                                const PredictiveSpec& spec, double y);

struct DiscretePredictive {
  double cdf;
  double pmf;
};

/// cdf is the d-GP cdf at floor(r_map(z - t_I)); pmf is its first difference,
/// which keeps the mass function normalized.
[[nodiscard]] DiscretePredictive predictive_given_theta_discrete(const ModelParams& params,
                                                                 const PredictiveSpec& spec,
                                                                 std::int64_t z);

struct PredictiveCurve {
  std::vector<double> cdf;
  std::vector<double> density;  ///< pdf (continuous) or pmf (discrete)
};

/// Monte Carlo posterior predictive: pointwise averages over the draws.
[[nodiscard]] PredictiveCurve posterior_predictive(const PosteriorDraws& post,
                                                   const PredictiveSpec& spec,
                                                   std::span<const double> grid);

[[nodiscard]] double predictive_quantile(const PosteriorDraws& post, const PredictiveSpec& spec,
                                         double prob);

struct Interval {
  double lo;
  double hi;
};

/// Equal-tailed predictive interval.
[[nodiscard]] Interval predictive_interval(const PosteriorDraws& post, const PredictiveSpec& spec,
                                           double level = 0.95);

struct ReturnLevelRow {
  double period = 0.0;
  std::size_t k = 0;            ///< exceedances behind this row's intermediate threshold
  double intermediate_threshold = 0.0;
  Summary level{0, 0, 0};       ///< posterior mean and credible interval of the return level
  double point_forecast = 0.0;  ///< predictive (1 - tau*)-quantile above the intermediate threshold
  Interval predictive{0, 0};
};

/// Return-level forecasts for each period T. Row T uses tau_I = 1 - 1/(ratio T)
/// with threshold the corresponding order statistic; draws are moved to that
/// threshold by the threshold-stable scale sigma + gamma (t_T - t_I).
/// Requires 1/(ratio T) <= k/n for every T.
[[nodiscard]] std::vector<ReturnLevelRow> rl_forecast(const PosteriorDraws& post,
                                                      const ExceedanceSet& exc,
                                                      std::span<const double> periods,
                                                      double ratio = 0.25, double level = 0.95);

/// How a what-if row picks its conditioning threshold.
enum class WhatIfConditioning { PosteriorMean, PerDraw };

struct WhatIfRow {
  double tau_e = 0.0;
  double tau_star = 1.0;
  Summary threshold{0, 0, 0};  ///< posterior of t_E (mean and credible interval)
  Interval predictive{0, 0};
};

[[nodiscard]] std::vector<WhatIfRow> whatif_sweep(
    const PosteriorDraws& post, const ExceedanceSet& exc, std::span<const double> tau_e_levels,
    double level = 0.95, WhatIfConditioning conditioning = WhatIfConditioning::PosteriorMean);

namespace detail {

// Per-draw predictive law above the threshold implied by `tau_star`, or above
// spec.conditioning_threshold when that is set. Shared with the
// proportional-tail module, which substitutes tau*/c(x).
double draw_cdf(const ModelParams& p, const PredictiveSpec& spec, double tau_star, double y);
double draw_density(const ModelParams& p, const PredictiveSpec& spec, double tau_star, double y);
double draw_quantile(const ModelParams& p, const PredictiveSpec& spec, double tau_star, double prob);

/// Inverts the average of monotone per-draw cdfs: bisection for continuous
/// laws, integer bisection for discrete ones.
double mixture_quantile(std::span<const ModelParams> draws, std::span<const double> tau_stars,
                        const PredictiveSpec& spec, double prob);

}  // namespace detail

}  // namespace tailcast
