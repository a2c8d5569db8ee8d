#include "tailcast/tail_models.hpp"

#include <cmath>
#include <string>

#include "tailcast/error.hpp"

namespace tailcast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool near_zero(double gamma) { return std::fabs(gamma) < kZeroGammaTol; }

void require_finite(double z, const char* fn) {
  if (!std::isfinite(z)) {
    throw InvalidInput(std::string(fn) + ": evaluation point must be finite");
  }
}

void require_discrete(const ModelParams& p, const char* fn) {
  if (p.kind() != ModelKind::Discrete) {
    throw InvalidInput(std::string(fn) + ": requires discrete model parameters");
  }
}

// log(1 + gamma z / sigma) / gamma, the shared building block; z inside support.
double scaled_log1p(double gamma, double sigma, double z) {
  return std::log1p(gamma * z / sigma) / gamma;
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::Continuous ? "continuous" : "discrete";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "continuous") return ModelKind::Continuous;
  if (text == "discrete") return ModelKind::Discrete;
  throw InvalidInput("unknown model kind '" + std::string(text) + "'");
}

ModelParams::ModelParams(double gamma, double sigma, ModelKind kind)
    : gamma_(gamma), sigma_(sigma), kind_(kind) {
  if (!std::isfinite(gamma)) throw InvalidInput("gamma must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("sigma must be finite and > 0");
  if (kind == ModelKind::Discrete && gamma < 0.0) {
    throw InvalidInput("discrete GP requires gamma >= 0");
  }
}

double gp_log_survival(const ModelParams& p, double z) {
  require_finite(z, "gp_log_survival");
  if (z <= 0.0) return 0.0;
  if (z >= p.upper_bound()) return -kInf;
  if (near_zero(p.gamma())) return -z / p.sigma();
  return -scaled_log1p(p.gamma(), p.sigma(), z);
}

double gp_survival(const ModelParams& p, double z) { return std::exp(gp_log_survival(p, z)); }

double gp_cdf(const ModelParams& p, double z) {
  const double ls = gp_log_survival(p, z);
  return ls == -kInf ? 1.0 : -std::expm1(ls);
}

double gp_log_pdf(const ModelParams& p, double z) {
  require_finite(z, "gp_log_pdf");
  if (z < 0.0 || z >= p.upper_bound()) return -kInf;
  const double g = p.gamma();
  const double s = p.sigma();
  if (near_zero(g)) return -std::log(s) - z / s;
  return -std::log(s) - (1.0 / g + 1.0) * std::log1p(g * z / s);
}

double gp_pdf(const ModelParams& p, double z) { return std::exp(gp_log_pdf(p, z)); }

double gp_quantile(const ModelParams& p, double prob) {
  if (!(prob >= 0.0 && prob < 1.0)) throw InvalidInput("gp_quantile: probability must lie in [0, 1)");
  const double l = std::log1p(-prob);  // log(1 - p) <= 0
  if (near_zero(p.gamma())) return -p.sigma() * l;
  return p.sigma() * std::expm1(-p.gamma() * l) / p.gamma();
}

double dgp_cdf(const ModelParams& p, std::int64_t z) {
  require_discrete(p, "dgp_cdf");
  if (z < 0) throw InvalidInput("dgp_cdf: z must be >= 0");
  return gp_cdf(p, static_cast<double>(z) + 1.0);
}

double dgp_log_pmf(const ModelParams& p, std::int64_t z) {
  require_discrete(p, "dgp_log_pmf");
  if (z < 0) throw InvalidInput("dgp_log_pmf: z must be >= 0");
  const double zd = static_cast<double>(z);
  const double l0 = gp_log_survival(p, zd);
  const double l1 = gp_log_survival(p, zd + 1.0);
  // S(z) - S(z+1) = S(z) * (1 - exp(l1 - l0)), exact in the far tail.
  return l0 + std::log(-std::expm1(l1 - l0));
}

double dgp_pmf(const ModelParams& p, std::int64_t z) { return std::exp(dgp_log_pmf(p, z)); }

std::int64_t dgp_quantile(const ModelParams& p, double prob) {
  require_discrete(p, "dgp_quantile");
  if (!(prob >= 0.0 && prob < 1.0)) throw InvalidInput("dgp_quantile: probability must lie in [0, 1)");
  // G(z) = H(z + 1), so the answer sits next to ceil(Q_H(p) - 1).
  const double guess = std::ceil(gp_quantile(p, prob) - 1.0);
  if (!(guess < 4.0e18)) throw NumericFailure("dgp_quantile: quantile exceeds the integer range");
  auto z = static_cast<std::int64_t>(std::max(0.0, guess));
  while (z > 0 && dgp_cdf(p, z - 1) >= prob) --z;
  while (dgp_cdf(p, z) < prob) ++z;
  return z;
}

double gp_loglik(const ModelParams& p, std::span<const double> excesses) {
  if (excesses.empty()) throw InvalidInput("gp_loglik: empty excess sequence");
  double total = 0.0;
  for (double z : excesses) {
    const double lp = gp_log_pdf(p, z);
    if (lp == -kInf) return -kInf;
    total += lp;
  }
  return total;
}

double dgp_loglik(const ModelParams& p, std::span<const double> excesses) {
  if (excesses.empty()) throw InvalidInput("dgp_loglik: empty excess sequence");
  require_discrete(p, "dgp_loglik");
  double total = 0.0;
  for (double z : excesses) {
    if (z < 0.0 || z != std::floor(z)) {
      throw InvalidInput("dgp_loglik: excesses must be nonnegative integers");
    }
    total += dgp_log_pmf(p, static_cast<std::int64_t>(z));
  }
  return total;
}

double loglik(const ModelParams& p, std::span<const double> excesses) {
  return p.kind() == ModelKind::Continuous ? gp_loglik(p, excesses) : dgp_loglik(p, excesses);
}

}  // namespace tailcast
