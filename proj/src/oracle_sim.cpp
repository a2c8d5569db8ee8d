#include "tailcast/oracle_sim.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "tailcast/dates.hpp"
#include "tailcast/error.hpp"
#include "tailcast/random.hpp"
#include "tailcast/tail_models.hpp"

namespace tailcast::sim {

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::ExactGP: return "exact-gp";
    case Family::Pareto: return "pareto";
    case Family::Frechet: return "frechet";
    case Family::Burr: return "burr";
    case Family::FlooredGP: return "floored-gp";
    case Family::HeteroscedasticPareto: return "hetero-pareto";
  }
  return "unknown";
}

Family parse_family(std::string_view text) {
  for (auto f : {Family::ExactGP, Family::Pareto, Family::Frechet, Family::Burr, Family::FlooredGP,
                 Family::HeteroscedasticPareto}) {
    if (text == to_string(f)) return f;
  }
  throw InvalidInput("unknown generator family '" + std::string(text) + "'");
}

void GeneratorSpec::validate() const {
  if (n < 1) throw InvalidInput("generator: n must be >= 1");
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidInput("generator: parameters must be finite");
  switch (family) {
    case Family::ExactGP:
      if (!(b > 0.0)) throw InvalidInput("generator: sigma must be > 0");
      break;
    case Family::FlooredGP:
      if (!(b > 0.0) || a < 0.0) throw InvalidInput("generator: floored GP needs gamma >= 0, sigma > 0");
      break;
    case Family::Pareto:
    case Family::Frechet:
      if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("generator: tail index and scale must be > 0");
      break;
    case Family::Burr:
      if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("generator: Burr c and k must be > 0");
      break;
    case Family::HeteroscedasticPareto:
      if (!(a > 0.0)) throw InvalidInput("generator: gamma must be > 0");
      if (!(b >= -1.0 && b <= 1.0)) throw InvalidInput("generator: beta must lie in [-1, 1]");
      break;
  }
}

namespace {

double quantile_from_uniform(const GeneratorSpec& s, double u) {
  switch (s.family) {
    case Family::ExactGP:
      return gp_quantile(ModelParams::continuous(s.a, s.b), u);
    case Family::FlooredGP:
      return std::floor(gp_quantile(ModelParams::continuous(s.a, s.b), u));
    case Family::Pareto:
      return s.b * std::pow(1.0 - u, -1.0 / s.a);
    case Family::Frechet:
      return s.b * std::pow(-std::log(u), -1.0 / s.a);
    case Family::Burr:
      return std::pow(std::expm1(-std::log1p(-u) / s.b), 1.0 / s.a);
    case Family::HeteroscedasticPareto:
      break;
  }
  throw InvalidInput("generator: no marginal quantile for the heteroscedastic family");
}

}  // namespace

GeneratedSample generate(const GeneratorSpec& spec) {
  spec.validate();
  GeneratedSample out;
  out.ys.reserve(spec.n);
  Rng rng = make_rng(spec.seed);
  if (spec.family == Family::HeteroscedasticPareto) {
    out.xs.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const double x = uniform_open(rng);
      const double u = uniform_open(rng);
      // Survival c(x) y^(-1/gamma) above c(x)^gamma.
      out.xs.push_back(x);
      out.ys.push_back(std::pow(true_scedasis(spec, x), spec.a) * std::pow(u, -spec.a));
    }
    return out;
  }
  for (std::size_t i = 0; i < spec.n; ++i) out.ys.push_back(quantile_from_uniform(spec, uniform_open(rng)));
  return out;
}

double true_cdf(const GeneratorSpec& spec, double y) {
  spec.validate();
  switch (spec.family) {
    case Family::ExactGP:
      return gp_cdf(ModelParams::continuous(spec.a, spec.b), y);
    case Family::FlooredGP:
      return y < 0.0 ? 0.0 : gp_cdf(ModelParams::continuous(spec.a, spec.b), std::floor(y) + 1.0);
    case Family::Pareto:
      return y <= spec.b ? 0.0 : -std::expm1(-spec.a * std::log(y / spec.b));
    case Family::Frechet:
      return y <= 0.0 ? 0.0 : std::exp(-std::pow(y / spec.b, -spec.a));
    case Family::Burr:
      return y <= 0.0 ? 0.0 : -std::expm1(-spec.b * std::log1p(std::pow(y, spec.a)));
    case Family::HeteroscedasticPareto:
      break;
  }
  throw InvalidInput("generator: no marginal cdf for the heteroscedastic family");
}

double true_quantile(const GeneratorSpec& spec, double p) {
  spec.validate();
  if (!(p >= 0.0 && p < 1.0)) throw InvalidInput("true_quantile: p must lie in [0, 1)");
  return quantile_from_uniform(spec, p);
}

double true_scedasis(const GeneratorSpec& spec, double x) {
  if (spec.family != Family::HeteroscedasticPareto) return 1.0;
  return 1.0 + spec.b * (2.0 * x - 1.0);
}

double oracle_empirical_quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw InvalidInput("empirical quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("empirical quantile: p must lie in [0, 1]");
  std::sort(sample.begin(), sample.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sample.size())));
  return sample[std::clamp<std::size_t>(rank, 1, sample.size()) - 1];
}

double oracle_numeric_cdf_inverse(const std::function<double(double)>& cdf, double p, double lo,
                                  double hi) {
  if (!(lo < hi) || cdf(lo) > p || cdf(hi) < p) {
    throw NumericFailure("cdf inverse: bracket does not contain the target probability");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-12 * std::max(1.0, std::fabs(mid))) break;
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double oracle_pdf_quadrature(const std::function<double(double)>& pdf, double lo, double hi) {
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      pdf, lo, hi, 20, 1e-12, &error);
  if (!(error <= 1e-8)) throw NumericFailure("quadrature: error estimate above 1e-8");
  return value;
}

std::int64_t oracle_integer_scan(const std::function<double(std::int64_t)>& cdf, double p,
                                 std::int64_t cap, std::int64_t start) {
  for (std::int64_t z = start; z <= cap; ++z) {
    if (cdf(z) >= p) return z;
  }
  throw NumericFailure("integer scan: cap reached before the target probability");
}

void write_csv(const std::string& path, const GeneratedSample& sample, const std::string& first_date) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  const auto start = parse_iso_date(first_date);
  std::vector<std::size_t> order(sample.ys.size());
  std::iota(order.begin(), order.end(), 0);
  const bool with_x = !sample.xs.empty();
  if (with_x) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sample.xs[a] < sample.xs[b]; });
  }
  out << (with_x ? "date,value,x\n" : "date,value\n");
  out.precision(17);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t i = order[r];
    out << format_iso_date(start + std::chrono::days(static_cast<long>(r))) << ',' << sample.ys[i];
    if (with_x) out << ',' << sample.xs[i];
    out << '\n';
  }
  if (!out) throw InvalidInput("failed writing '" + path + "'");
}

}  // namespace tailcast::sim
