#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace tailcast {

enum class ModelKind { Continuous, Discrete };

[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;
/// Accepts "continuous" / "discrete"; throws InvalidInput otherwise.
[[nodiscard]] ModelKind parse_model_kind(std::string_view text);

/// Below this |gamma| the GP forms switch to their exponential limits.
inline constexpr double kZeroGammaTol = 1e-10;

/// Shape/scale pair of a GP or discrete-GP law. Invariants are enforced on
/// construction: sigma > 0 and finite, and a Discrete model needs gamma >= 0.
class ModelParams {
 public:
  ModelParams(double gamma, double sigma, ModelKind kind);

  static ModelParams continuous(double gamma, double sigma) {
    return {gamma, sigma, ModelKind::Continuous};
  }
  static ModelParams discrete(double gamma, double sigma) {
    return {gamma, sigma, ModelKind::Discrete};
  }

  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] double sigma() const noexcept { return sigma_; }
  [[nodiscard]] ModelKind kind() const noexcept { return kind_; }

  /// Right end of the continuous support: -sigma/gamma for gamma < 0, else +inf.
  [[nodiscard]] double upper_bound() const noexcept {
    return gamma_ < -kZeroGammaTol ? -sigma_ / gamma_ : std::numeric_limits<double>::infinity();
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double gamma_;
  double sigma_;
  ModelKind kind_;
};

// Continuous GP law H_theta(z) = H_gamma(z / sigma). These evaluate the
// continuous law for any params; for Discrete params that is the continuous
// extension whose floor is the d-GP variable.

[[nodiscard]] double gp_cdf(const ModelParams& p, double z);
[[nodiscard]] double gp_survival(const ModelParams& p, double z);
/// log of the survival function; -inf at or beyond the upper bound.
[[nodiscard]] double gp_log_survival(const ModelParams& p, double z);
[[nodiscard]] double gp_pdf(const ModelParams& p, double z);
[[nodiscard]] double gp_log_pdf(const ModelParams& p, double z);
/// Inverse cdf for p in [0, 1).
[[nodiscard]] double gp_quantile(const ModelParams& p, double prob);

// Discrete GP law of floor(Y), Y ~ GP(gamma, sigma). Require Discrete params.

[[nodiscard]] double dgp_cdf(const ModelParams& p, std::int64_t z);
[[nodiscard]] double dgp_pmf(const ModelParams& p, std::int64_t z);
[[nodiscard]] double dgp_log_pmf(const ModelParams& p, std::int64_t z);
/// Smallest integer z >= 0 with dgp_cdf(z) >= prob.
[[nodiscard]] std::int64_t dgp_quantile(const ModelParams& p, double prob);

/// Sum of log densities. Returns -inf when any excess lies outside the
/// support; throws InvalidInput on an empty sequence.
[[nodiscard]] double gp_loglik(const ModelParams& p, std::span<const double> excesses);
/// Discrete analogue; every excess must be a nonnegative integer value.
[[nodiscard]] double dgp_loglik(const ModelParams& p, std::span<const double> excesses);
/// Dispatches on `p.kind()`.
[[nodiscard]] double loglik(const ModelParams& p, std::span<const double> excesses);

}  // namespace tailcast
