#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "hp_oracle.hpp"
#include "tailcast/error.hpp"
#include "tailcast/inference.hpp"
#include "tailcast/oracle_sim.hpp"
#include "tailcast/random.hpp"

using namespace tailcast;

namespace {

ExceedanceSet gp_exceedances(double g, double s, std::size_t k, std::uint64_t seed) {
  // An appended zero becomes the threshold, so the excesses are exactly the
  // generated GP sample.
  auto ys = sim::generate({sim::Family::ExactGP, g, s, k + 1, seed}).ys;
  ys.push_back(0.0);
  return build_exceedances(ys, k + 1);
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("ml fit recovers the shape") {
  const auto exc = gp_exceedances(0.4, 1.9, 5000, 1);
  const auto fit = ml_fit(exc);
  CHECK(std::fabs(fit.params.gamma() - 0.4) < 0.06);
  CHECK(fit.params.sigma() == doctest::Approx(1.9).epsilon(0.1));
  CHECK(fit.se_gamma == doctest::Approx(1.4 / std::sqrt(5001.0)).epsilon(0.15));
  CHECK(fit.cov.gg == doctest::Approx(fit.se_gamma * fit.se_gamma));
  CHECK_FALSE(fit.boundary);
}

TEST_CASE("ml fit is scale equivariant") {
  auto exc = gp_exceedances(0.25, 1.0, 800, 2);
  const auto a = ml_fit(exc);
  for (double& e : exc.excesses) e *= 37.5;
  const auto b = ml_fit(exc);
  CHECK(b.params.gamma() == doctest::Approx(a.params.gamma()).epsilon(1e-5));
  CHECK(b.params.sigma() == doctest::Approx(37.5 * a.params.sigma()).epsilon(1e-5));
}

TEST_CASE("ml fit degenerate and small inputs") {
  ExceedanceSet exc;
  exc.n = 20;
  exc.k = 6;
  exc.excesses.assign(6, 2.0);
  exc.tau_i = 0.7;
  bool flagged = false;
  try {
    flagged = ml_fit(exc).boundary;
  } catch (const FitFailure&) {
    flagged = true;
  }
  CHECK(flagged);
  exc.k = 4;
  exc.excesses = {0.1, 0.2, 0.3, 0.4};
  CHECK_THROWS_AS((void)ml_fit(exc), InvalidInput);
}

TEST_CASE("discrete ml fit on floored GP") {
  auto zs = sim::generate({sim::Family::FlooredGP, 0.5, 50, 5000, 3}).ys;
  zs.push_back(0.0);
  const auto exc = build_exceedances(zs, 5000, ModelKind::Discrete);
  const auto fit = ml_fit(exc);
  CHECK(fit.params.kind() == ModelKind::Discrete);
  CHECK(std::fabs(fit.params.gamma() - 0.5) < 0.07);
}

TEST_CASE("default prior") {
  const auto exc = gp_exceedances(0.3, 2.0, 2000, 4);
  const auto prior = default_prior(exc);
  CHECK(prior.sigma_hat == doctest::Approx(ml_fit(exc).params.sigma()));

  PriorSpec p2;
  p2.sigma_hat = 2.0;
  const double mean = sim::oracle_pdf_quadrature(
      [&](double s) { return s * std::exp(p2.scale.log_density(s, 2.0)); }, 0.0, INFINITY);
  CHECK(mean == doctest::Approx(2.0).epsilon(1e-8));

  const double at_zero = (1.0 / kPi) / (1.0 - (std::atan(-1.0) / kPi + 0.5));
  CHECK(prior.shape.density(0.0) == doctest::Approx(at_zero).epsilon(1e-12));
  const double mass = sim::oracle_pdf_quadrature([&](double g) { return prior.shape.density(g); }, -1.0,
                                                 INFINITY);
  CHECK(std::fabs(mass - 1.0) < 1e-6);
  CHECK(prior.shape.density(-1.5) == 0.0);

  const auto again = default_prior(exc);
  CHECK(again.sigma_hat == prior.sigma_hat);
}

TEST_CASE("log posterior") {
  const auto exc = gp_exceedances(0.3, 2.0, 300, 5);
  const auto prior = default_prior(exc);
  const double top = exc.excesses.back();
  CHECK(std::isinf(log_posterior_unnorm(ModelParams::continuous(-0.5, top / 4), exc, prior)));
  CHECK(std::isinf(log_posterior_unnorm(ModelParams::continuous(-1.2, 100 * top), exc, prior)));

  Rng rng = make_rng(99);
  for (int i = 0; i < 5; ++i) {
    const double g = 0.1 + 0.5 * uniform_open(rng);
    const double s = 1.0 + 2.0 * uniform_open(rng);
    const auto params = ModelParams::continuous(g, s);
    CHECK(log_posterior_unnorm(params, exc, prior) ==
          doctest::Approx(gp_loglik(params, exc.excesses) + prior.log_density(g, s)).epsilon(1e-14));

    using oracle::hp;
    hp total = 0;
    for (double e : exc.excesses) total += log(oracle::gp_pdf(hp(g), hp(s), hp(e)));
    const hp pi = boost::math::constants::pi<hp>();
    total += log(1 / (pi * (1 + hp(g) * hp(g))) / hp("0.75"));
    total += -hp(s) / hp(prior.sigma_hat) - log(hp(prior.sigma_hat));
    const double expect = static_cast<double>(total);
    CHECK(std::fabs(log_posterior_unnorm(params, exc, prior) - expect) < 1e-9 * std::fabs(expect));
  }
}

TEST_CASE("mcmc sampler") {
  const auto exc = gp_exceedances(0.4, 1.9, 5000, 6);
  const auto fit = ml_fit(exc);
  const auto prior = default_prior(fit);
  const auto post = mcmc_sample(exc, prior, 20000, 5000, 17);
  REQUIRE(post.size() == 20000);
  const auto gs = post.gammas();
  const double mean = std::accumulate(gs.begin(), gs.end(), 0.0) / static_cast<double>(gs.size());
  CHECK(std::fabs(mean - fit.params.gamma()) < 0.05);
  CHECK(post.acceptance_rate > 0.1);
  CHECK(post.acceptance_rate < 0.5);
  CHECK(post.diagnostics.ess_gamma > 500);
  for (std::size_t i = 0; i < post.size(); i += 97) {
    CHECK(std::isfinite(log_posterior_unnorm(post.draws[i], exc, prior)));
    CHECK(post.draws[i].gamma() > -1.0);
  }

  const auto again = mcmc_sample(exc, prior, 20000, 5000, 17);
  CHECK(again.draws == post.draws);
  const auto other = mcmc_sample(exc, prior, 2000, 500, 18);
  CHECK_FALSE(std::equal(other.draws.begin(), other.draws.end(), post.draws.begin()));

  const auto single = mcmc_sample(exc, prior, 1, 100, 3);
  REQUIRE(single.size() == 1);
  CHECK(single.draws.front().sigma() > 0.0);

  McmcOptions opt;
  opt.draws = 2000;
  opt.burnin = 1000;
  opt.seed = 5;
  const auto chains = mcmc_sample_chains(exc, prior, opt, 4);
  CHECK(chains.size() == 8000);
  CHECK(chains.chains == 4);
  CHECK(chains.diagnostics.rhat_gamma < 1.05);
  CHECK(chains.diagnostics.rhat_log_sigma < 1.05);
}

TEST_CASE("discrete mcmc keeps the shape nonnegative") {
  auto zs = sim::generate({sim::Family::FlooredGP, 0.3, 20, 800, 8}).ys;
  zs.push_back(0.0);
  const auto exc = build_exceedances(zs, 800, ModelKind::Discrete);
  const auto post = mcmc_sample(exc, default_prior(exc), 3000, 1000, 2);
  CHECK(post.kind == ModelKind::Discrete);
  for (const auto& d : post.draws) CHECK(d.gamma() >= 0.0);
}

TEST_CASE("effective sample size and rhat") {
  Rng rng = make_rng(4);
  std::vector<double> iid(20000);
  for (double& v : iid) v = standard_normal(rng);
  CHECK(effective_sample_size(iid) == doctest::Approx(20000).epsilon(0.1));
  std::vector<double> ar(20000);
  double prev = 0.0;
  for (double& v : ar) v = prev = 0.9 * prev + standard_normal(rng);
  // AR(1) with phi = 0.9: ESS = n (1 - phi) / (1 + phi).
  CHECK(effective_sample_size(ar) == doctest::Approx(20000 * 0.1 / 1.9).epsilon(0.3));

  std::vector<std::vector<double>> same{std::vector<double>(iid.begin(), iid.begin() + 10000),
                                        std::vector<double>(iid.begin() + 10000, iid.end())};
  CHECK(split_rhat(same) == doctest::Approx(1.0).epsilon(0.01));
  auto shifted = same;
  for (double& v : shifted[1]) v += 3.0;
  CHECK(split_rhat(shifted) > 1.5);
}

TEST_CASE("extreme quantile closed form") {
  using oracle::hp;
  const double expect = static_cast<double>(hp(10) + hp(2) * (pow(hp("0.1"), hp("-0.5")) - 1) / hp("0.5"));
  CHECK(std::fabs(extreme_quantile(ModelParams::continuous(0.5, 2), 10, 0.1) - expect) < 1e-9);
  CHECK(extreme_quantile(ModelParams::continuous(0.5, 2), 10, 1.0) == 10.0);
  CHECK(extreme_quantile(ModelParams::discrete(0.5, 2), 10, 1.0) == 9.0);
  const double a = static_cast<double>(hp(1800) * (pow(hp("0.1"), hp("-0.5")) - 1) / hp("0.5"));
  CHECK(std::floor(a) == 7784.0);
  CHECK(extreme_quantile(ModelParams::discrete(0.5, 1800), 418, 0.1) == 8201.0);
  CHECK(extreme_quantile(ModelParams::continuous(0.0, 2), 1, std::exp(-1.0)) == doctest::Approx(3.0));
  CHECK_THROWS_AS((void)extreme_quantile(ModelParams::continuous(0.5, 2), 10, 0.0), InvalidInput);
  CHECK_THROWS_AS((void)extreme_quantile(ModelParams::continuous(0.5, 2), 10, 1.5), InvalidInput);

  double prev = -INFINITY;
  for (double t = 1.0; t > 1e-4; t *= 0.8) {
    const double q = extreme_quantile(ModelParams::continuous(0.3, 1.5), 5, t);
    CHECK(q > prev);
    prev = q;
  }
  for (double t : {0.5, 0.1, 0.01, 0.001}) {
    const double c = extreme_quantile(ModelParams::continuous(0.4, 5000), 100, t);
    const double d = extreme_quantile(ModelParams::discrete(0.4, 5000), 100, t);
    CHECK(std::fabs(d - std::floor(c)) <= 1.0);
  }
}

TEST_CASE("posterior extreme quantile uses every draw") {
  PosteriorDraws post;
  post.draws = {ModelParams::continuous(0.5, 2), ModelParams::continuous(0.2, 1)};
  ExceedanceSet exc;
  exc.threshold = 10;
  const auto q = posterior_extreme_quantile(post, exc, 0.1);
  REQUIRE(q.size() == 2);
  CHECK(q[0] == extreme_quantile(post.draws[0], 10, 0.1));
  CHECK(q[1] == extreme_quantile(post.draws[1], 10, 0.1));
}

TEST_CASE("summaries") {
  const std::vector<double> three{1, 2, 3};
  CHECK(summarize(three).mean == 2.0);
  const std::vector<double> flat(50, 4.0);
  const auto s = summarize(flat);
  CHECK(s.lo == 4.0);
  CHECK(s.hi == 4.0);
  Rng rng = make_rng(12);
  std::vector<double> normal(1000000);
  for (double& v : normal) v = standard_normal(rng);
  const auto ns = summarize(normal);
  CHECK(std::fabs(ns.lo + 1.959964) < 0.01);
  CHECK(std::fabs(ns.hi - 1.959964) < 0.01);
  const std::vector<double> empty;
  CHECK_THROWS_AS((void)summarize(empty), InvalidInput);
  CHECK_THROWS_AS((void)summarize(three, 1.0), InvalidInput);
}
