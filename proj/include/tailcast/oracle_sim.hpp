#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace tailcast::sim {

enum class Family { ExactGP, Pareto, Frechet, Burr, FlooredGP, HeteroscedasticPareto };

[[nodiscard]] std::string_view to_string(Family family) noexcept;
[[nodiscard]] Family parse_family(std::string_view text);

/// Parameter meaning per family:
///   ExactGP, FlooredGP      a = gamma, b = sigma
///   Pareto, Frechet         a = tail index alpha, b = scale
///   Burr                    a = c, b = k   (survival (1 + y^c)^-k)
///   HeteroscedasticPareto   a = gamma, b = beta, scedasis c(x) = 1 + beta (2x - 1)
struct GeneratorSpec {
  Family family = Family::ExactGP;
  double a = 0.0;
  double b = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  /// Throws InvalidInput when n or the parameters are out of range.
  void validate() const;
};

struct GeneratedSample {
  std::vector<double> ys;
  std::vector<double> xs;  ///< covariates; empty unless heteroscedastic
};

/// Inverse-cdf sampling from `make_rng(seed)`, one uniform per response
/// (the heteroscedastic family draws the covariate first).
[[nodiscard]] GeneratedSample generate(const GeneratorSpec& spec);

/// Marginal cdf and quantile of the generated responses. Not available for
/// the heteroscedastic family.
[[nodiscard]] double true_cdf(const GeneratorSpec& spec, double y);
[[nodiscard]] double true_quantile(const GeneratorSpec& spec, double p);

/// Scedasis of the heteroscedastic family.
[[nodiscard]] double true_scedasis(const GeneratorSpec& spec, double x);

/// Nearest rank: the ceil(p n)-th smallest value (the smallest for p n < 1).
[[nodiscard]] double oracle_empirical_quantile(std::vector<double> sample, double p);

/// Bisection on [lo, hi] to an absolute width of 1e-12 (relative above 1).
[[nodiscard]] double oracle_numeric_cdf_inverse(const std::function<double(double)>& cdf, double p,
                                                double lo, double hi);

/// Adaptive Gauss-Kronrod integral over [lo, hi]; hi may be +inf.
/// Throws NumericFailure if the error estimate exceeds 1e-8.
[[nodiscard]] double oracle_pdf_quadrature(const std::function<double(double)>& pdf, double lo,
                                           double hi);

/// Smallest integer z in [start, cap] with cdf(z) >= p, by linear scan.
[[nodiscard]] std::int64_t oracle_integer_scan(const std::function<double(std::int64_t)>& cdf,
                                               double p, std::int64_t cap, std::int64_t start = 0);

/// Writes `date,value` rows (plus `x` for covariate samples) with daily dates
/// starting at `first_date`. Covariate samples are written in covariate
/// order so that row order tracks normalized time.
void write_csv(const std::string& path, const GeneratedSample& sample,
               const std::string& first_date = "2000-01-01");

}  // namespace tailcast::sim
