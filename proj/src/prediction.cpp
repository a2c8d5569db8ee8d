#include "tailcast/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tailcast/error.hpp"

namespace tailcast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbTol = 1e-9;

bool near_zero(double g) { return std::fabs(g) < kZeroGammaTol; }

void require_tau_star(double tau_star, const char* fn) {
  if (!(tau_star > 0.0 && tau_star <= 1.0)) {
    throw InvalidInput(std::string(fn) + ": tau_star must lie in (0, 1]");
  }
}

// tau*^gamma and sigma (1 - tau*^gamma) / gamma, the two pieces of the r-map.
struct RMapCoefficients {
  double slope;
  double shift;
};

RMapCoefficients r_coefficients(const ModelParams& p, double tau_star) {
  const double lt = std::log(tau_star);
  const double g = p.gamma();
  if (near_zero(g)) return {1.0, -p.sigma() * lt};
  return {std::exp(g * lt), -p.sigma() * std::expm1(g * lt) / g};
}

// Scale of the excess law above a fixed t_E. Discrete laws condition on
// Z > t_E, i.e. Z >= t_E + 1, hence the extra unit.
double conditioned_scale(const ModelParams& p, const PredictiveSpec& spec) {
  const double shift = *spec.conditioning_threshold - spec.threshold +
                       (spec.kind == ModelKind::Discrete ? 1.0 : 0.0);
  return p.sigma() + p.gamma() * shift;
}

double require_integer(double z) {
  if (z != std::floor(z)) throw InvalidInput("discrete predictive: evaluation points must be integers");
  return z;
}

}  // namespace

PredictiveSpec PredictiveSpec::from_levels(double tau_i, double tau_e, double threshold,
                                           ModelKind kind) {
  if (!(tau_i > 0.0 && tau_i < 1.0)) throw InvalidInput("tau_I must lie in (0, 1)");
  if (!(tau_e >= tau_i && tau_e < 1.0)) {
    throw InvalidInput("tau_E must satisfy tau_I <= tau_E < 1 (tau_E=" + std::to_string(tau_e) + ")");
  }
  PredictiveSpec spec;
  spec.tau_i = tau_i;
  spec.tau_e = tau_e;
  spec.tau_star = (1.0 - tau_e) / (1.0 - tau_i);
  spec.threshold = threshold;
  spec.kind = kind;
  return spec;
}

PredictiveSpec PredictiveSpec::from_exceedances(const ExceedanceSet& exc, double tau_e) {
  return from_levels(exc.tau_i, tau_e, exc.threshold, exc.kind);
}

double r_map(const ModelParams& params, double offset, double tau_star) {
  require_tau_star(tau_star, "r_map");
  const auto c = r_coefficients(params, tau_star);
  return offset * c.slope - c.shift;
}

namespace detail {

double draw_cdf(const ModelParams& p, const PredictiveSpec& spec, double tau_star, double y) {
  if (spec.conditioning_threshold) {
    const double t_e = *spec.conditioning_threshold;
    const double s = conditioned_scale(p, spec);
    if (spec.kind == ModelKind::Continuous) {
      if (!(s > 0.0)) return y >= t_e ? 1.0 : 0.0;
      return gp_cdf(ModelParams::continuous(p.gamma(), s), y - t_e);
    }
    if (y <= t_e) return 0.0;
    return gp_cdf(ModelParams::continuous(p.gamma(), s), std::floor(y - t_e - 1.0) + 1.0);
  }
  const auto c = r_coefficients(p, tau_star);
  const double r = (y - spec.threshold) * c.slope - c.shift;
  if (spec.kind == ModelKind::Continuous) return gp_cdf(p, r);
  const double m = std::floor(r);
  // G(m) = H(m + 1) for m >= 0, and 0 below the support.
  return m < 0.0 ? 0.0 : gp_cdf(p, m + 1.0);
}

double draw_density(const ModelParams& p, const PredictiveSpec& spec, double tau_star, double y) {
  if (spec.kind == ModelKind::Discrete) {
    return draw_cdf(p, spec, tau_star, y) - draw_cdf(p, spec, tau_star, y - 1.0);
  }
  if (spec.conditioning_threshold) {
    const double s = conditioned_scale(p, spec);
    if (!(s > 0.0)) return 0.0;
    return gp_pdf(ModelParams::continuous(p.gamma(), s), y - *spec.conditioning_threshold);
  }
  const auto c = r_coefficients(p, tau_star);
  const double r = (y - spec.threshold) * c.slope - c.shift;
  return gp_pdf(p, r) * c.slope;
}

double draw_quantile(const ModelParams& p, const PredictiveSpec& spec, double tau_star, double prob) {
  if (spec.conditioning_threshold) {
    const double t_e = *spec.conditioning_threshold;
    const double s = conditioned_scale(p, spec);
    if (!(s > 0.0)) return t_e;
    if (spec.kind == ModelKind::Continuous) {
      return t_e + gp_quantile(ModelParams::continuous(p.gamma(), s), prob);
    }
    return t_e + 1.0 + static_cast<double>(dgp_quantile(ModelParams::discrete(p.gamma(), s), prob));
  }
  const auto c = r_coefficients(p, tau_star);
  if (spec.kind == ModelKind::Continuous) {
    return spec.threshold + (gp_quantile(p, prob) + c.shift) / c.slope;
  }
  const double m = static_cast<double>(dgp_quantile(p, prob));
  double z = spec.threshold + std::ceil((m + c.shift) / c.slope);
  if (!std::isfinite(z)) return z;
  // Rounding in the inverse can be off by one either way.
  while (draw_cdf(p, spec, tau_star, z - 1.0) >= prob) z -= 1.0;
  while (draw_cdf(p, spec, tau_star, z) < prob) z += 1.0;
  return z;
}

double mixture_quantile(std::span<const ModelParams> draws, std::span<const double> tau_stars,
                        const PredictiveSpec& spec, double prob) {
  if (draws.empty()) throw InvalidInput("predictive quantile: no posterior draws");
  if (!(prob > 0.0 && prob < 1.0)) throw InvalidInput("predictive quantile: probability must lie in (0, 1)");
  auto tau_of = [&](std::size_t i) { return tau_stars.size() == 1 ? tau_stars[0] : tau_stars[i]; };

  double lo = kInf, hi = -kInf;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double q = draw_quantile(draws[i], spec, tau_of(i), prob);
    if (!std::isfinite(q)) {
      throw NumericFailure("predictive quantile: draw " + std::to_string(i) + " (gamma=" +
                           std::to_string(draws[i].gamma()) + ", sigma=" +
                           std::to_string(draws[i].sigma()) + ") has no finite quantile at p=" +
                           std::to_string(prob));
    }
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  if (lo == hi) return lo;

  auto mixture_cdf = [&](double y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) acc += draw_cdf(draws[i], spec, tau_of(i), y);
    return acc / static_cast<double>(draws.size());
  };

  if (spec.kind == ModelKind::Discrete) {
    // Smallest integer with mixture cdf >= prob; F(hi) >= prob by construction.
    while (hi - lo > 0.5) {
      const double mid = std::floor(lo + (hi - lo) / 2.0);
      if (mixture_cdf(mid) >= prob) hi = mid;
      else lo = mid + 1.0;
    }
    return hi;
  }
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = lo + (hi - lo) / 2.0;
    const double f = mixture_cdf(mid);
    if (std::fabs(f - prob) <= kProbTol) return mid;
    if (f < prob) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, std::fabs(hi))) break;
  }
  return lo + (hi - lo) / 2.0;
}

}  // namespace detail

double predictive_cdf_given_theta(const ModelParams& params, const PredictiveSpec& spec, double y) {
  require_tau_star(spec.tau_star, "predictive_cdf_given_theta");
  if (spec.kind != ModelKind::Continuous) {
    throw InvalidInput("predictive_cdf_given_theta: continuous spec required");
  }
  return detail::draw_cdf(params, spec, spec.tau_star, y);
}

double predictive_pdf_given_theta(const ModelParams& params, const PredictiveSpec& spec, double y) {
  require_tau_star(spec.tau_star, "predictive_pdf_given_theta");
  if (spec.kind != ModelKind::Continuous) {
    throw InvalidInput("predictive_pdf_given_theta: continuous spec required");
  }
  return detail::draw_density(params, spec, spec.tau_star, y);
}

DiscretePredictive predictive_given_theta_discrete(const ModelParams& params,
                                                   const PredictiveSpec& spec, std::int64_t z) {
  require_tau_star(spec.tau_star, "predictive_given_theta_discrete");
  if (spec.kind != ModelKind::Discrete || params.kind() != ModelKind::Discrete) {
    throw InvalidInput("predictive_given_theta_discrete: discrete spec and parameters required");
  }
  const auto zd = static_cast<double>(z);
  return {detail::draw_cdf(params, spec, spec.tau_star, zd),
          detail::draw_density(params, spec, spec.tau_star, zd)};
}

PredictiveCurve posterior_predictive(const PosteriorDraws& post, const PredictiveSpec& spec,
                                     std::span<const double> grid) {
  require_tau_star(spec.tau_star, "posterior_predictive");
  if (post.draws.empty() || grid.empty()) {
    throw InvalidInput("posterior_predictive: draws and grid must be nonempty");
  }
  PredictiveCurve curve;
  curve.cdf.reserve(grid.size());
  curve.density.reserve(grid.size());
  const auto m = static_cast<double>(post.size());
  for (double y : grid) {
    if (spec.kind == ModelKind::Discrete) require_integer(y);
    double c = 0.0, d = 0.0;
    for (const auto& p : post.draws) {
      c += detail::draw_cdf(p, spec, spec.tau_star, y);
      d += detail::draw_density(p, spec, spec.tau_star, y);
    }
    curve.cdf.push_back(c / m);
    curve.density.push_back(d / m);
  }
  return curve;
}

double predictive_quantile(const PosteriorDraws& post, const PredictiveSpec& spec, double prob) {
  require_tau_star(spec.tau_star, "predictive_quantile");
  const double tau[] = {spec.tau_star};
  return detail::mixture_quantile(post.draws, tau, spec, prob);
}

Interval predictive_interval(const PosteriorDraws& post, const PredictiveSpec& spec, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("predictive_interval: level must lie in (0, 1)");
  const double tail = (1.0 - level) / 2.0;
  return {predictive_quantile(post, spec, tail), predictive_quantile(post, spec, 1.0 - tail)};
}

std::vector<ReturnLevelRow> rl_forecast(const PosteriorDraws& post, const ExceedanceSet& exc,
                                        std::span<const double> periods, double ratio,
                                        double level) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidInput("rl_forecast: ratio must lie in (0, 1]");
  if (post.draws.empty()) throw InvalidInput("rl_forecast: no posterior draws");
  const auto n = static_cast<double>(exc.n);
  const double base_fraction = static_cast<double>(exc.k) / n;
  std::vector<ReturnLevelRow> rows;
  for (double period : periods) {
    const double fraction = 1.0 / (ratio * period);
    if (!std::isfinite(period) || !(period > 0.0) || fraction > base_fraction * (1.0 + 1e-12)) {
      throw InvalidInput("rl_forecast: return period T=" + std::to_string(period) +
                         " needs 1/(ratio*T) <= k/n = " + std::to_string(base_fraction));
    }
    const auto k_t = static_cast<std::size_t>(std::floor(fraction * n + 1e-9));
    if (k_t < 1) {
      throw InvalidInput("rl_forecast: return period T=" + std::to_string(period) +
                         " lies beyond the observed sample");
    }
    const double t_t = exc.order_statistic_from_top(std::min(k_t, exc.k));

    PosteriorDraws moved = post;
    for (auto& d : moved.draws) {
      const double s = d.sigma() + d.gamma() * (t_t - exc.threshold);
      if (!(s > 0.0)) {
        throw NumericFailure("rl_forecast: draw has no support at threshold " + std::to_string(t_t));
      }
      d = ModelParams(d.gamma(), s, d.kind());
    }
    std::vector<double> levels;
    levels.reserve(moved.size());
    for (const auto& d : moved.draws) levels.push_back(extreme_quantile(d, t_t, ratio));

    const double tau_i = 1.0 - fraction;
    const PredictiveSpec above_t = PredictiveSpec::from_levels(tau_i, tau_i, t_t, exc.kind);
    ReturnLevelRow row;
    row.period = period;
    row.k = k_t;
    row.intermediate_threshold = t_t;
    row.level = summarize(levels, level);
    row.point_forecast = predictive_quantile(moved, above_t, 1.0 - ratio);
    row.predictive = predictive_interval(moved, above_t, level);
    rows.push_back(row);
  }
  return rows;
}

std::vector<WhatIfRow> whatif_sweep(const PosteriorDraws& post, const ExceedanceSet& exc,
                                    std::span<const double> tau_e_levels, double level,
                                    WhatIfConditioning conditioning) {
  std::vector<WhatIfRow> rows;
  for (double tau_e : tau_e_levels) {
    if (!(tau_e >= exc.tau_i)) {
      throw InvalidInput("whatif_sweep: tau_E=" + std::to_string(tau_e) + " is below tau_I=" +
                         std::to_string(exc.tau_i));
    }
    PredictiveSpec spec = PredictiveSpec::from_exceedances(exc, tau_e);
    WhatIfRow row;
    row.tau_e = tau_e;
    row.tau_star = spec.tau_star;
    row.threshold = summarize(posterior_extreme_quantile(post, exc, spec.tau_star), level);
    if (conditioning == WhatIfConditioning::PosteriorMean) {
      spec.conditioning_threshold =
          exc.kind == ModelKind::Discrete ? std::round(row.threshold.mean) : row.threshold.mean;
    }
    row.predictive = predictive_interval(post, spec, level);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tailcast
