#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "tailcast/cli.hpp"
#include "tailcast/error.hpp"
#include "tailcast/inference.hpp"
#include "tailcast/oracle_sim.hpp"
#include "tailcast/prediction.hpp"
#include "tailcast/proportional_tail.hpp"
#include "tailcast/tail_models.hpp"
#include "tailcast/threshold.hpp"

namespace py = pybind11;
using namespace tailcast;

namespace {

ModelKind kind_of(const std::string& name) { return parse_model_kind(name); }

PredictiveSpec make_spec(const ExceedanceSet& exc, double tau_e, std::optional<double> conditioning_threshold) {
  auto spec = PredictiveSpec::from_exceedances(exc, tau_e);
  spec.conditioning_threshold = conditioning_threshold;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_tailcast, m) {
  m.doc() = "Peaks-over-threshold inference and prediction";

  auto base = py::register_exception<Error>(m, "TailcastError", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<DegenerateSample>(m, "DegenerateSample", base.ptr());
  py::register_exception<NumericFailure>(m, "NumericFailure", base.ptr());
  py::register_exception<EmptyBall>(m, "EmptyBall", base.ptr());
  py::register_exception<FitFailure>(m, "FitFailure", base.ptr());

  py::enum_<ModelKind>(m, "ModelKind")
      .value("Continuous", ModelKind::Continuous)
      .value("Discrete", ModelKind::Discrete);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<double, double, ModelKind>(), py::arg("gamma"), py::arg("sigma"),
           py::arg("kind") = ModelKind::Continuous)
      .def_property_readonly("gamma", &ModelParams::gamma)
      .def_property_readonly("sigma", &ModelParams::sigma)
      .def_property_readonly("kind", &ModelParams::kind)
      .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; })
      .def("__repr__", [](const ModelParams& p) {
        return "ModelParams(gamma=" + std::to_string(p.gamma()) + ", sigma=" + std::to_string(p.sigma()) + ", " +
               std::string(to_string(p.kind())) + ")";
      });

  m.def("gp_cdf", &gp_cdf, py::arg("params"), py::arg("z"));
  m.def("gp_survival", &gp_survival, py::arg("params"), py::arg("z"));
  m.def("gp_pdf", &gp_pdf, py::arg("params"), py::arg("z"));
  m.def("gp_quantile", &gp_quantile, py::arg("params"), py::arg("prob"));
  m.def("dgp_cdf", &dgp_cdf, py::arg("params"), py::arg("z"));
  m.def("dgp_pmf", &dgp_pmf, py::arg("params"), py::arg("z"));
  m.def("dgp_quantile", &dgp_quantile, py::arg("params"), py::arg("prob"));
  m.def("loglik", [](const ModelParams& p, const std::vector<double>& x) { return loglik(p, x); }, py::arg("params"),
        py::arg("excesses"));

  py::class_<ExceedanceSet>(m, "ExceedanceSet")
      .def_readonly("n", &ExceedanceSet::n)
      .def_readonly("k", &ExceedanceSet::k)
      .def_readonly("threshold", &ExceedanceSet::threshold)
      .def_readonly("excesses", &ExceedanceSet::excesses)
      .def_readonly("tau_i", &ExceedanceSet::tau_i)
      .def_readonly("kind", &ExceedanceSet::kind);
  m.def(
      "build_exceedances",
      [](const std::vector<double>& sample, std::size_t k, const std::string& kind) {
        return build_exceedances(sample, k, kind_of(kind));
      },
      py::arg("sample"), py::arg("k"), py::arg("kind") = "continuous");

  py::class_<TracePoint>(m, "TracePoint")
      .def_readonly("index", &TracePoint::index)
      .def_readonly("k", &TracePoint::k)
      .def_readonly("gamma", &TracePoint::gamma)
      .def_readonly("se", &TracePoint::se)
      .def_readonly("ci_lo", &TracePoint::ci_lo)
      .def_readonly("ci_hi", &TracePoint::ci_hi)
      .def_readonly("ok", &TracePoint::ok)
      .def_readonly("error", &TracePoint::error);
  m.def(
      "gamma_stability_trace",
      [](const std::vector<double>& sample, std::size_t k_min, std::size_t k_max, const std::string& kind) {
        return gamma_stability_trace(sample, k_min, k_max, kind_of(kind));
      },
      py::arg("sample"), py::arg("k_min"), py::arg("k_max"), py::arg("kind") = "continuous");
  m.def(
      "moving_window_trace",
      [](const std::vector<double>& sample, std::size_t window, double fraction, const std::string& kind,
         std::size_t step) { return moving_window_trace(sample, window, fraction, kind_of(kind), step); },
      py::arg("sample"), py::arg("window"), py::arg("fraction"), py::arg("kind") = "continuous", py::arg("step") = 1);

  py::class_<MlFit>(m, "MlFit")
      .def_readonly("params", &MlFit::params)
      .def_readonly("se_gamma", &MlFit::se_gamma)
      .def_readonly("se_sigma", &MlFit::se_sigma)
      .def_readonly("loglik", &MlFit::loglik)
      .def_readonly("boundary", &MlFit::boundary);
  m.def("ml_fit", &ml_fit, py::arg("exceedances"));

  py::class_<PriorSpec>(m, "PriorSpec")
      .def_readonly("sigma_hat", &PriorSpec::sigma_hat)
      .def("log_density", &PriorSpec::log_density, py::arg("gamma"), py::arg("sigma"));
  m.def("default_prior", py::overload_cast<const MlFit&>(&default_prior), py::arg("fit"));

  py::class_<PosteriorDraws>(m, "PosteriorDraws")
      .def_readonly("draws", &PosteriorDraws::draws)
      .def_readonly("acceptance_rate", &PosteriorDraws::acceptance_rate)
      .def_readonly("chains", &PosteriorDraws::chains)
      .def_readonly("seed", &PosteriorDraws::seed)
      .def_readonly("warnings", &PosteriorDraws::warnings)
      .def_property_readonly("gammas", &PosteriorDraws::gammas)
      .def_property_readonly("sigmas", &PosteriorDraws::sigmas)
      .def_property_readonly("diagnostics",
                             [](const PosteriorDraws& p) {
                               const auto& d = p.diagnostics;
                               return py::dict(py::arg("ess_gamma") = d.ess_gamma,
                                               py::arg("ess_log_sigma") = d.ess_log_sigma,
                                               py::arg("rhat_gamma") = d.rhat_gamma,
                                               py::arg("rhat_log_sigma") = d.rhat_log_sigma);
                             })
      .def("__len__", &PosteriorDraws::size);
  m.def(
      "mcmc_sample",
      [](const ExceedanceSet& exc, const PriorSpec& prior, std::size_t draws, std::size_t burnin, std::uint64_t seed,
         std::size_t chains, std::size_t thin) {
        McmcOptions o;
        o.draws = draws;
        o.burnin = burnin;
        o.seed = seed;
        o.thin = thin;
        return mcmc_sample_chains(exc, prior, o, chains);
      },
      py::arg("exceedances"), py::arg("prior"), py::arg("draws") = 20000, py::arg("burnin") = 5000,
      py::arg("seed") = 0, py::arg("chains") = 1, py::arg("thin") = 1);

  py::class_<Summary>(m, "Summary")
      .def_readonly("mean", &Summary::mean)
      .def_readonly("lo", &Summary::lo)
      .def_readonly("hi", &Summary::hi);
  py::class_<Interval>(m, "Interval").def_readonly("lo", &Interval::lo).def_readonly("hi", &Interval::hi);
  m.def(
      "summarize", [](const std::vector<double>& d, double level) { return summarize(d, level); }, py::arg("draws"),
      py::arg("level") = 0.95);
  m.def("extreme_quantile", &extreme_quantile, py::arg("params"), py::arg("threshold"), py::arg("tau_star"));
  m.def("posterior_extreme_quantile", &posterior_extreme_quantile, py::arg("posterior"), py::arg("exceedances"),
        py::arg("tau_star"));

  py::class_<PredictiveSpec>(m, "PredictiveSpec")
      .def(py::init(&make_spec), py::arg("exceedances"), py::arg("tau_e"),
           py::arg("conditioning_threshold") = std::nullopt)
      .def_readonly("tau_i", &PredictiveSpec::tau_i)
      .def_readonly("tau_e", &PredictiveSpec::tau_e)
      .def_readonly("tau_star", &PredictiveSpec::tau_star)
      .def_readonly("threshold", &PredictiveSpec::threshold)
      .def_readwrite("conditioning_threshold", &PredictiveSpec::conditioning_threshold);
  m.def(
      "posterior_predictive",
      [](const PosteriorDraws& post, const PredictiveSpec& spec, const std::vector<double>& grid) {
        auto c = posterior_predictive(post, spec, grid);
        return py::make_tuple(c.cdf, c.density);
      },
      py::arg("posterior"), py::arg("spec"), py::arg("grid"));
  m.def("predictive_quantile", &predictive_quantile, py::arg("posterior"), py::arg("spec"), py::arg("prob"));
  m.def("predictive_interval", &predictive_interval, py::arg("posterior"), py::arg("spec"), py::arg("level") = 0.95);

  py::class_<WhatIfRow>(m, "WhatIfRow")
      .def_readonly("tau_e", &WhatIfRow::tau_e)
      .def_readonly("tau_star", &WhatIfRow::tau_star)
      .def_readonly("threshold", &WhatIfRow::threshold)
      .def_readonly("predictive", &WhatIfRow::predictive);
  m.def(
      "whatif_sweep",
      [](const PosteriorDraws& post, const ExceedanceSet& exc, const std::vector<double>& levels, double level,
         bool per_draw) {
        return whatif_sweep(post, exc, levels, level,
                            per_draw ? WhatIfConditioning::PerDraw : WhatIfConditioning::PosteriorMean);
      },
      py::arg("posterior"), py::arg("exceedances"), py::arg("tau_e_levels"), py::arg("level") = 0.95,
      py::arg("per_draw") = false);

  py::class_<ReturnLevelRow>(m, "ReturnLevelRow")
      .def_readonly("period", &ReturnLevelRow::period)
      .def_readonly("k", &ReturnLevelRow::k)
      .def_readonly("intermediate_threshold", &ReturnLevelRow::intermediate_threshold)
      .def_readonly("level", &ReturnLevelRow::level)
      .def_readonly("point_forecast", &ReturnLevelRow::point_forecast)
      .def_readonly("predictive", &ReturnLevelRow::predictive);
  m.def(
      "rl_forecast",
      [](const PosteriorDraws& post, const ExceedanceSet& exc, const std::vector<double>& periods, double ratio,
         double level) { return rl_forecast(post, exc, periods, ratio, level); },
      py::arg("posterior"), py::arg("exceedances"), py::arg("periods"), py::arg("ratio") = 0.25,
      py::arg("level") = 0.95);

  py::class_<ConcomitantSet>(m, "ConcomitantSet")
      .def_readonly("xs", &ConcomitantSet::xs)
      .def_readonly("all_xs", &ConcomitantSet::all_xs);
  m.def(
      "concomitants",
      [](const std::vector<double>& xs, const std::vector<double>& ys, std::size_t k) {
        return concomitants(xs, ys, k);
      },
      py::arg("xs"), py::arg("ys"), py::arg("k"));
  py::class_<ScedasisPosterior>(m, "ScedasisPosterior")
      .def_readonly("grid", &ScedasisPosterior::grid)
      .def_readonly("m", &ScedasisPosterior::m)
      .def("column", &ScedasisPosterior::column, py::arg("point"))
      .def_static("constant_one", &ScedasisPosterior::constant_one, py::arg("grid"), py::arg("m"));
  m.def(
      "scedasis_posterior",
      [](const ConcomitantSet& con, double bw, std::optional<double> dp_mass, const std::vector<double>& grid,
         std::size_t draws, std::uint64_t seed) {
        return scedasis_posterior(con, bw, dp_mass.value_or(default_dp_mass(bw)), grid, draws, seed);
      },
      py::arg("concomitants"), py::arg("bandwidth"), py::arg("dp_mass") = std::nullopt, py::arg("grid"),
      py::arg("draws") = 1000, py::arg("seed") = 0);

  py::class_<TestResult>(m, "TestResult")
      .def_readonly("statistic", &TestResult::statistic)
      .def_readonly("critical_value", &TestResult::critical_value)
      .def_readonly("p_value", &TestResult::p_value)
      .def_readonly("k", &TestResult::k)
      .def_readonly("mc_reps", &TestResult::mc_reps)
      .def_property_readonly("reject", &TestResult::reject);
  m.def("heteroscedasticity_test", &heteroscedasticity_test, py::arg("concomitants"), py::arg("mc_reps") = 5000,
        py::arg("seed") = 0, py::arg("alpha") = 0.05);
  m.def("conditional_quantile_posterior", &conditional_quantile_posterior, py::arg("posterior"),
        py::arg("scedasis"), py::arg("exceedances"), py::arg("tau_star"), py::arg("x"));
  m.def(
      "conditional_predictive_interval",
      [](const PosteriorDraws& post, const ScedasisPosterior& sced, const PredictiveSpec& spec, double x,
         double level) { return conditional_predictive_interval(post, sced, spec, x, level).interval; },
      py::arg("posterior"), py::arg("scedasis"), py::arg("spec"), py::arg("x"), py::arg("level") = 0.95);

  m.def(
      "simulate",
      [](const std::string& family, double a, double b, std::size_t n, std::uint64_t seed) {
        auto s = sim::generate({sim::parse_family(family), a, b, n, seed});
        return py::make_tuple(std::move(s.ys), std::move(s.xs));
      },
      py::arg("family"), py::arg("a"), py::arg("b"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"tailcast"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        return cli::run(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"));
}
