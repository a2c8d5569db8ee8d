#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailcast/tail_models.hpp"

namespace tailcast {

/// Top-k peaks over the (n-k)-th order statistic of a sample.
struct ExceedanceSet {
  std::size_t n = 0;
  std::size_t k = 0;
  double threshold = 0.0;        ///< Y_{n-k,n} (or Z_{n-k,n})
  std::vector<double> excesses;  ///< Y_{n-k+i,n} - Y_{n-k,n}, ascending, size k
  double tau_i = 0.0;            ///< 1 - k/n
  ModelKind kind = ModelKind::Continuous;

  /// The (n - j)-th order statistic for j in [0, k], i.e. the value with j
  /// larger observations; j == k gives the threshold itself.
  [[nodiscard]] double order_statistic_from_top(std::size_t j) const;
};

/// Ties at the threshold are resolved by order-statistic position, so tied
/// values yield zero excesses and are kept. Discrete kind requires an
/// integer-valued sample and keeps integer excesses.
[[nodiscard]] ExceedanceSet build_exceedances(std::span<const double> sample, std::size_t k,
                                              ModelKind kind = ModelKind::Continuous);

/// One ML fit inside a diagnostic trace. `ok == false` marks a failed fit,
/// whose message is kept in `error` and whose numeric fields are NaN.
struct TracePoint {
  std::size_t index = 0;  ///< k for stability traces, window start for moving windows
  std::size_t k = 0;
  double gamma = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;  ///< gamma - 1.96 se
  double ci_hi = 0.0;
  bool ok = false;
  std::string error;
};

/// ML estimate of gamma with its symmetric 95% interval for every k in
/// [k_min, k_max].
[[nodiscard]] std::vector<TracePoint> gamma_stability_trace(std::span<const double> sample,
                                                            std::size_t k_min, std::size_t k_max,
                                                            ModelKind kind = ModelKind::Continuous);

/// Dynamic estimates over windows [s, s + window) of the time-ordered sample,
/// s = 0, step, 2 step, ...; each window uses k = ceil(fraction * window).
[[nodiscard]] std::vector<TracePoint> moving_window_trace(std::span<const double> sample,
                                                          std::size_t window, double fraction,
                                                          ModelKind kind = ModelKind::Continuous,
                                                          std::size_t step = 1);

}  // namespace tailcast
