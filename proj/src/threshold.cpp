#include "tailcast/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tailcast/detail/parallel.hpp"
#include "tailcast/error.hpp"
#include "tailcast/inference.hpp"

namespace tailcast {

namespace {

constexpr double kNormal975 = 1.959963984540054;

TracePoint trace_point(std::span<const double> sample, std::size_t index, std::size_t k,
                       ModelKind kind) {
  TracePoint pt;
  pt.index = index;
  pt.k = k;
  try {
    const MlFit fit = ml_fit(build_exceedances(sample, k, kind));
    pt.gamma = fit.params.gamma();
    pt.se = fit.se_gamma;
    pt.ci_lo = pt.gamma - kNormal975 * pt.se;
    pt.ci_hi = pt.gamma + kNormal975 * pt.se;
    pt.ok = std::isfinite(pt.se);
    if (!pt.ok) pt.error = "observed information is not positive definite";
  } catch (const Error& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    pt.gamma = pt.se = pt.ci_lo = pt.ci_hi = nan;
    pt.ok = false;
    pt.error = e.what();
  }
  return pt;
}

}  // namespace

double ExceedanceSet::order_statistic_from_top(std::size_t j) const {
  if (j > k) throw InvalidInput("order_statistic_from_top: j exceeds k");
  if (j == k) return threshold;
  return threshold + excesses[k - j - 1];
}

ExceedanceSet build_exceedances(std::span<const double> sample, std::size_t k, ModelKind kind) {
  const std::size_t n = sample.size();
  if (k < 1 || k >= n) {
    throw InvalidInput("build_exceedances: need 1 <= k < n (k=" + std::to_string(k) +
                       ", n=" + std::to_string(n) + ")");
  }
  for (double v : sample) {
    if (!std::isfinite(v)) throw InvalidInput("build_exceedances: sample values must be finite");
    if (kind == ModelKind::Discrete && v != std::floor(v)) {
      throw InvalidInput("build_exceedances: discrete samples must be integer-valued");
    }
  }
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    throw DegenerateSample("build_exceedances: sample has fewer than 2 distinct values");
  }
  ExceedanceSet exc;
  exc.n = n;
  exc.k = k;
  exc.kind = kind;
  exc.tau_i = 1.0 - static_cast<double>(k) / static_cast<double>(n);
  exc.threshold = sorted[n - k - 1];
  exc.excesses.reserve(k);
  for (std::size_t i = n - k; i < n; ++i) exc.excesses.push_back(sorted[i] - exc.threshold);
  return exc;
}

std::vector<TracePoint> gamma_stability_trace(std::span<const double> sample, std::size_t k_min,
                                              std::size_t k_max, ModelKind kind) {
  if (k_min > k_max) throw InvalidInput("gamma_stability_trace: k_min > k_max");
  if (k_min < 5) throw InvalidInput("gamma_stability_trace: k_min must be >= 5");
  if (k_max >= sample.size()) throw InvalidInput("gamma_stability_trace: k_max must be < n");
  std::vector<TracePoint> out(k_max - k_min + 1);
  detail::parallel_for(out.size(), [&](std::size_t i) {
    out[i] = trace_point(sample, k_min + i, k_min + i, kind);
  });
  return out;
}

std::vector<TracePoint> moving_window_trace(std::span<const double> sample, std::size_t window,
                                            double fraction, ModelKind kind, std::size_t step) {
  if (window > sample.size()) throw InvalidInput("moving_window_trace: window exceeds sample size");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidInput("moving_window_trace: sample fraction must lie in (0, 1)");
  }
  if (step == 0) throw InvalidInput("moving_window_trace: step must be >= 1");
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(window)));
  if (k < 5 || k >= window) {
    throw InvalidInput("moving_window_trace: window too small for k >= 5 exceedances");
  }
  const std::size_t count = (sample.size() - window) / step + 1;
  std::vector<TracePoint> out(count);
  detail::parallel_for(count, [&](std::size_t i) {
    out[i] = trace_point(sample.subspan(i * step, window), i * step, k, kind);
  });
  return out;
}

}  // namespace tailcast
