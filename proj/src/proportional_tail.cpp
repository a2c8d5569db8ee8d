#include "tailcast/proportional_tail.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tailcast/error.hpp"
#include "tailcast/random.hpp"

namespace tailcast {

namespace {

void require_unit_interval(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InvalidInput(std::string(what) + ": covariates must lie in [0, 1]");
    }
  }
}

double ball_volume(double x, double bandwidth) {
  return std::min(1.0, x + bandwidth) - std::max(0.0, x - bandwidth);
}

std::size_t count_in_ball(double x, std::span<const double> xs, double bandwidth) {
  return static_cast<std::size_t>(std::count_if(
      xs.begin(), xs.end(), [&](double v) { return std::fabs(v - x) <= bandwidth; }));
}

// Null-distribution engine: the sample is sorted once and every replicate is
// a random subset of positions, so the sup distance only needs the subset's
// distinct-value ranks.
class SubsetKs {
 public:
  explicit SubsetKs(std::span<const double> all) : n_(all.size()) {
    std::vector<double> sorted(all.begin(), all.end());
    std::sort(sorted.begin(), sorted.end());
    rank_.resize(n_);
    std::size_t r = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i > 0 && sorted[i] != sorted[i - 1]) {
        cum_.push_back(i);
        ++r;
      }
      rank_[i] = r;
    }
    cum_.push_back(n_);  // cum_[r] = #{values <= distinct value r}
  }

  double statistic(std::vector<std::size_t>& ranks) const {
    std::sort(ranks.begin(), ranks.end());
    const auto k = static_cast<double>(ranks.size());
    const auto n = static_cast<double>(n_);
    double sup = 0.0;
    std::size_t i = 0;
    while (i < ranks.size()) {
      const std::size_t r = ranks[i];
      const double before_all = r == 0 ? 0.0 : static_cast<double>(cum_[r - 1]);
      sup = std::max(sup, std::fabs(static_cast<double>(i) / k - before_all / n));
      while (i < ranks.size() && ranks[i] == r) ++i;
      sup = std::max(sup, std::fabs(static_cast<double>(i) / k - static_cast<double>(cum_[r]) / n));
    }
    return std::sqrt(k) * sup;
  }

  [[nodiscard]] std::size_t rank_of_position(std::size_t pos) const { return rank_[pos]; }
  [[nodiscard]] std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<std::size_t> rank_;
  std::vector<std::size_t> cum_;
};

}  // namespace

ConcomitantSet concomitants(std::span<const double> xs, std::span<const double> ys, std::size_t k) {
  if (xs.size() != ys.size()) throw InvalidInput("concomitants: covariate and response sizes differ");
  const std::size_t n = ys.size();
  if (k < 1 || k >= n) throw InvalidInput("concomitants: need 1 <= k < n");
  require_unit_interval(xs, "concomitants");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ys[a] < ys[b]; });
  ConcomitantSet con;
  con.all_xs.assign(xs.begin(), xs.end());
  con.xs.reserve(k);
  for (std::size_t i = 0; i < k; ++i) con.xs.push_back(xs[idx[n - 1 - i]]);
  return con;
}

double p_hat(double x, std::span<const double> all_xs, double bandwidth) {
  if (all_xs.empty()) return 0.0;
  return static_cast<double>(count_in_ball(x, all_xs, bandwidth)) /
         static_cast<double>(all_xs.size());
}

std::vector<double> ScedasisPosterior::column(std::size_t point) const {
  std::vector<double> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(at(i, point));
  return out;
}

std::size_t ScedasisPosterior::grid_index(double x) const {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (std::fabs(grid[j] - x) <= 1e-12) return j;
  }
  throw InvalidInput("scedasis: x=" + std::to_string(x) + " is not a grid point");
}

ScedasisPosterior ScedasisPosterior::constant_one(std::vector<double> grid, std::size_t m) {
  ScedasisPosterior s;
  s.draws.assign(grid.size() * m, 1.0);
  s.grid = std::move(grid);
  s.m = m;
  return s;
}

ScedasisPosterior scedasis_posterior(const ConcomitantSet& con, double bandwidth, double dp_mass,
                                     std::span<const double> grid, std::size_t m,
                                     std::uint64_t seed) {
  if (!(bandwidth > 0.0 && bandwidth < 1.0)) throw InvalidInput("scedasis: bandwidth must lie in (0, 1)");
  if (!(dp_mass > 0.0)) throw InvalidInput("scedasis: dp_mass must be > 0");
  if (m < 1) throw InvalidInput("scedasis: need at least one draw");
  if (grid.empty()) throw InvalidInput("scedasis: empty grid");
  require_unit_interval(grid, "scedasis grid");
  const auto k = static_cast<double>(con.xs.size());

  ScedasisPosterior out;
  out.grid.assign(grid.begin(), grid.end());
  out.m = m;
  out.bandwidth = bandwidth;
  out.dp_mass = dp_mass;
  out.draws.resize(m * grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid[j];
    const double p = p_hat(x, con.all_xs, bandwidth);
    if (p <= 0.0) {
      throw EmptyBall(x, "scedasis: no covariates within the ball around x=" + std::to_string(x));
    }
    const double vol = ball_volume(x, bandwidth);
    const auto inside = static_cast<double>(count_in_ball(x, con.xs, bandwidth));
    const double a = dp_mass * vol + inside;
    const double b = dp_mass * (1.0 - vol) + (k - inside);
    Rng rng = make_rng(seed, j);
    for (std::size_t i = 0; i < m; ++i) {
      const double w = b > 0.0 ? beta_variate(rng, a, b) : 1.0;
      out.draws[i * grid.size() + j] = w / p;
    }
  }
  return out;
}

double ks_statistic(std::span<const double> concomitant_xs, std::span<const double> all_xs) {
  if (concomitant_xs.empty() || all_xs.empty()) throw InvalidInput("ks_statistic: empty sample");
  std::vector<double> a(concomitant_xs.begin(), concomitant_xs.end());
  std::vector<double> b(all_xs.begin(), all_xs.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto ka = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < a.size() || j < b.size()) {
    const double v = std::min(i < a.size() ? a[i] : b[j], j < b.size() ? b[j] : a[i]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    sup = std::max(sup, std::fabs(static_cast<double>(i) / ka - static_cast<double>(j) / nb));
  }
  return std::sqrt(ka) * sup;
}

TestResult heteroscedasticity_test(const ConcomitantSet& con, std::size_t mc_reps,
                                   std::uint64_t seed, double alpha) {
  if (mc_reps < 1000) throw InvalidInput("heteroscedasticity_test: mc_reps must be >= 1000");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("heteroscedasticity_test: alpha must lie in (0, 1)");
  const std::size_t k = con.xs.size();
  if (k < 20) throw InvalidInput("heteroscedasticity_test: need k >= 20");
  if (k >= con.all_xs.size()) throw InvalidInput("heteroscedasticity_test: need k < n");

  TestResult res;
  res.k = k;
  res.mc_reps = mc_reps;
  res.alpha = alpha;
  res.statistic = ks_statistic(con.xs, con.all_xs);

  const SubsetKs engine(con.all_xs);
  std::vector<std::size_t> positions(engine.size());
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<std::size_t> ranks(k);
  std::vector<double> null(mc_reps);
  Rng rng = make_rng(seed, 0);
  for (std::size_t b = 0; b < mc_reps; ++b) {
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t span = positions.size() - i;
      const std::size_t j = i + static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(span));
      std::swap(positions[i], positions[std::min(j, positions.size() - 1)]);
      ranks[i] = engine.rank_of_position(positions[i]);
    }
    null[b] = engine.statistic(ranks);
  }
  const auto exceed = static_cast<double>(
      std::count_if(null.begin(), null.end(), [&](double v) { return v >= res.statistic; }));
  res.p_value = (1.0 + exceed) / (1.0 + static_cast<double>(mc_reps));
  std::sort(null.begin(), null.end());
  const auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(mc_reps)));
  res.critical_value = null[std::clamp<std::size_t>(rank, 1, mc_reps) - 1];
  return res;
}

namespace {

void require_paired(const PosteriorDraws& post, const ScedasisPosterior& sced) {
  if (post.size() != sced.m) {
    throw InvalidInput("scedasis and parameter posteriors must have the same number of draws (" +
                       std::to_string(sced.m) + " vs " + std::to_string(post.size()) + ")");
  }
}

}  // namespace

std::vector<double> conditional_quantile_posterior(const PosteriorDraws& post,
                                                   const ScedasisPosterior& sced,
                                                   const ExceedanceSet& exc, double tau_star,
                                                   double x) {
  if (!(tau_star > 0.0 && tau_star <= 1.0)) {
    throw InvalidInput("conditional_quantile_posterior: tau_star must lie in (0, 1]");
  }
  require_paired(post, sced);
  const std::size_t j = sced.grid_index(x);
  std::vector<double> out;
  out.reserve(post.size());
  for (std::size_t i = 0; i < post.size(); ++i) {
    const auto& d = post.draws[i];
    const double ratio = tau_star / sced.at(i, j);
    if (ratio <= 1.0) {
      out.push_back(extreme_quantile(d, exc.threshold, ratio));
      continue;
    }
    // Frequency of extremes at x is below the average: the quantile falls
    // under the intermediate threshold.
    const double g = d.gamma();
    const double lr = std::log(ratio);
    const double a = std::fabs(g) < kZeroGammaTol ? -d.sigma() * lr : d.sigma() * std::expm1(-g * lr) / g;
    out.push_back(d.kind() == ModelKind::Continuous ? exc.threshold + a
                                                    : exc.threshold + std::floor(a) - 1.0);
  }
  return out;
}

namespace {

std::vector<double> conditional_tau_stars(const PosteriorDraws& post, const ScedasisPosterior& sced,
                                          const PredictiveSpec& spec, double x,
                                          std::size_t& clamped) {
  if (!(spec.tau_star > 0.0 && spec.tau_star <= 1.0)) {
    throw InvalidInput("conditional predictive: tau_star must lie in (0, 1]");
  }
  require_paired(post, sced);
  const std::size_t j = sced.grid_index(x);
  std::vector<double> taus(post.size());
  clamped = 0;
  for (std::size_t i = 0; i < post.size(); ++i) {
    double t = spec.tau_star / sced.at(i, j);
    if (!(t <= 1.0)) {
      t = 1.0;
      ++clamped;
    }
    taus[i] = t;
  }
  return taus;
}

}  // namespace

ConditionalPredictive conditional_predictive(const PosteriorDraws& post,
                                             const ScedasisPosterior& sced,
                                             const PredictiveSpec& spec, double x,
                                             std::span<const double> grid) {
  if (post.draws.empty() || grid.empty()) {
    throw InvalidInput("conditional_predictive: draws and grid must be nonempty");
  }
  ConditionalPredictive out;
  const auto taus = conditional_tau_stars(post, sced, spec, x, out.clamped);
  const auto m = static_cast<double>(post.size());
  for (double y : grid) {
    if (spec.kind == ModelKind::Discrete && y != std::floor(y)) {
      throw InvalidInput("discrete predictive: evaluation points must be integers");
    }
    double c = 0.0, d = 0.0;
    for (std::size_t i = 0; i < post.size(); ++i) {
      c += detail::draw_cdf(post.draws[i], spec, taus[i], y);
      d += detail::draw_density(post.draws[i], spec, taus[i], y);
    }
    out.curve.cdf.push_back(c / m);
    out.curve.density.push_back(d / m);
  }
  return out;
}

ConditionalInterval conditional_predictive_interval(const PosteriorDraws& post,
                                                    const ScedasisPosterior& sced,
                                                    const PredictiveSpec& spec, double x,
                                                    double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("conditional interval: level must lie in (0, 1)");
  ConditionalInterval out;
  const auto taus = conditional_tau_stars(post, sced, spec, x, out.clamped);
  const double tail = (1.0 - level) / 2.0;
  out.interval = {detail::mixture_quantile(post.draws, taus, spec, tail),
                  detail::mixture_quantile(post.draws, taus, spec, 1.0 - tail)};
  return out;
}

}  // namespace tailcast
