#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "report.hpp"
#include "tailcast/cli.hpp"
#include "tailcast/dates.hpp"
#include "tailcast/error.hpp"
#include "tailcast/inference.hpp"
#include "tailcast/oracle_sim.hpp"
#include "tailcast/prediction.hpp"
#include "tailcast/proportional_tail.hpp"
#include "tailcast/random.hpp"
#include "tailcast/threshold.hpp"

namespace tailcast::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";
constexpr std::uint64_t kScedasisStream = 1;
constexpr std::uint64_t kTestStream = 2;

struct Options {
  std::string config;
  // data
  std::string data;
  std::string date_col = "date";
  std::string value_col = "value";
  std::string x_col;
  std::string kind = "continuous";
  std::size_t k = 0;
  double fraction = 0.05;
  double tau_i = 0.0;
  std::uint64_t seed = 1;
  std::string out = "tailcast-out";
  bool fixed_report = false;
  double level = 0.95;
  // mcmc
  std::size_t M = 20000;
  std::size_t burnin = 5000;
  std::size_t chains = 1;
  std::size_t thin = 1;
  // fit
  std::size_t k_min = 10;
  std::size_t k_max = 200;
  std::size_t window = 800;
  double window_fraction = 0.0;
  std::size_t window_step = 1;
  // prediction
  std::vector<double> tau_e;
  std::size_t points = 200;
  std::string conditioning = "mean";
  std::string horizon_end;
  double ratio = 0.25;
  std::size_t series_step = 30;
  // proportional tail
  double bw = 0.2;
  double dp_mass = 0.0;
  std::size_t grid = 101;
  double pred_tau_e = 0.995;
  std::size_t mc_reps = 5000;
  double alpha = 0.05;
  std::string label;
  // simulate
  std::string family = "exact-gp";
  double a = 0.4;
  double b = 1.9;
  std::size_t n = 5000;
  std::string first_date = "2000-01-01";
};

// ---------------------------------------------------------------- reports

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json echo_config(const CLI::App& sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name.empty()) continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (opt->get_expected_max() > 1) cfg[name] = res;
      else cfg[name] = res.empty() ? std::string() : res.back();
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

struct Report {
  json doc;
  fs::path dir;
  std::vector<std::string> outputs;

  Report(const std::string& command, const CLI::App& sub, const Options& o) : dir(o.out) {
    doc["command"] = command;
    doc["version"] = kVersion;
    if (!o.fixed_report) doc["generated_at"] = utc_now();
    doc["config"] = echo_config(sub);
    fs::create_directories(dir);
  }

  fs::path file(const std::string& name) {
    outputs.push_back(name);
    return dir / name;
  }

  void finish(const std::string& name) {
    doc["outputs"] = outputs;
    write_json(dir / name, doc);
  }
};

json summary_json(const Summary& s) { return {{"mean", s.mean}, {"ci_lo", s.lo}, {"ci_hi", s.hi}}; }

// ---------------------------------------------------------------- pipeline

struct Dataset {
  IngestResult ingest;
  std::vector<double> values;  ///< date order
  ModelKind kind = ModelKind::Continuous;
};

Dataset load(const Options& o) {
  if (o.data.empty()) throw InvalidInput("--data is required");
  Dataset d;
  d.kind = parse_model_kind(o.kind);
  d.ingest = ingest_csv(o.data, {o.date_col, o.value_col, o.x_col}, d.kind);
  d.values.reserve(d.ingest.records.size());
  for (const auto& r : d.ingest.records) d.values.push_back(r.value);
  return d;
}

std::size_t choose_k(const Options& o, std::size_t n) {
  double k = 0.0;
  if (o.k > 0) k = static_cast<double>(o.k);
  else if (o.tau_i > 0.0) k = std::round((1.0 - o.tau_i) * static_cast<double>(n));
  else k = std::round(o.fraction * static_cast<double>(n));
  if (!(k >= 1.0 && k < static_cast<double>(n))) {
    throw InvalidInput("effective sample size k=" + std::to_string(static_cast<long long>(k)) +
                       " must satisfy 1 <= k < n=" + std::to_string(n));
  }
  return static_cast<std::size_t>(k);
}

json data_json(const Options& o, const Dataset& d) {
  return {{"path", o.data},
          {"kept", d.ingest.kept},
          {"dropped", d.ingest.dropped},
          {"first_date", format_iso_date(d.ingest.records.front().date)},
          {"last_date", format_iso_date(d.ingest.records.back().date)}};
}

json exceedance_json(const ExceedanceSet& exc) {
  return {{"n", exc.n},
          {"k", exc.k},
          {"tau_i", exc.tau_i},
          {"threshold", exc.threshold},
          {"kind", std::string(to_string(exc.kind))}};
}

json fit_json(const MlFit& f) {
  return {{"gamma", f.params.gamma()},
          {"sigma", f.params.sigma()},
          {"se_gamma", f.se_gamma},
          {"se_sigma", f.se_sigma},
          {"cov", {{"gamma_gamma", f.cov.gg}, {"gamma_sigma", f.cov.gs}, {"sigma_sigma", f.cov.ss}}},
          {"loglik", f.loglik},
          {"boundary", f.boundary},
          {"evaluations", f.evaluations}};
}

struct Posterior {
  Dataset data;
  ExceedanceSet exc;
  MlFit fit;
  PosteriorDraws post;
};

Posterior sample_posterior(const Options& o) {
  Dataset data = load(o);
  auto exc = build_exceedances(data.values, choose_k(o, data.values.size()), data.kind);
  auto fit = ml_fit(exc);
  McmcOptions mo;
  mo.draws = o.M;
  mo.burnin = o.burnin;
  mo.thin = o.thin;
  mo.seed = o.seed;
  auto post = mcmc_sample_chains(exc, default_prior(fit), mo, o.chains);
  return {std::move(data), std::move(exc), std::move(fit), std::move(post)};
}

json posterior_json(const Posterior& p) {
  const auto& d = p.post.diagnostics;
  return {{"draws", p.post.size()},
          {"chains", p.post.chains},
          {"burnin", p.post.burnin},
          {"thin", p.post.thin},
          {"seed", p.post.seed},
          {"acceptance_rate", p.post.acceptance_rate},
          {"ess_gamma", d.ess_gamma},
          {"ess_log_sigma", d.ess_log_sigma},
          {"rhat_gamma", d.rhat_gamma},
          {"rhat_log_sigma", d.rhat_log_sigma},
          {"warnings", p.post.warnings},
          {"gamma", summary_json(summarize(p.post.gammas()))},
          {"sigma", summary_json(summarize(p.post.sigmas()))}};
}

void base_sections(Report& r, const Options& o, const Posterior& p) {
  r.doc["data"] = data_json(o, p.data);
  r.doc["exceedances"] = exceedance_json(p.exc);
  r.doc["ml"] = fit_json(p.fit);
  r.doc["posterior"] = posterior_json(p);
}

std::vector<double> tau_e_levels(const Options& o, std::vector<double> fallback) {
  return o.tau_e.empty() ? fallback : o.tau_e;
}

WhatIfConditioning parse_conditioning(const std::string& s) {
  if (s == "mean") return WhatIfConditioning::PosteriorMean;
  if (s == "per-draw") return WhatIfConditioning::PerDraw;
  throw InvalidInput("--conditioning must be 'mean' or 'per-draw'");
}

std::chrono::sys_days horizon_or_last(const Options& o, const Dataset& d) {
  return o.horizon_end.empty() ? d.ingest.records.back().date : parse_iso_date(o.horizon_end);
}

/// December 31st of every year after the last observation up to the horizon.
std::vector<std::chrono::sys_days> year_ends(std::chrono::sys_days last, std::chrono::sys_days horizon) {
  using namespace std::chrono;
  std::vector<sys_days> out;
  for (int y = static_cast<int>(year_month_day{last}.year()); y <= static_cast<int>(year_month_day{horizon}.year()); ++y) {
    const sys_days d{year{y} / December / 31};
    if (d > last && d <= horizon) out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------- commands

void cmd_fit(const CLI::App& sub, const Options& o) {
  Report r("fit", sub, o);
  const Dataset d = load(o);
  const std::size_t n = d.values.size();
  const auto exc = build_exceedances(d.values, choose_k(o, n), d.kind);
  const auto fit = ml_fit(exc);
  r.doc["data"] = data_json(o, d);
  r.doc["exceedances"] = exceedance_json(exc);
  r.doc["ml"] = fit_json(fit);

  const std::size_t k_max = std::min(o.k_max, n - 1);
  const auto trace = gamma_stability_trace(d.values, o.k_min, k_max, d.kind);
  CsvWriter st(r.file("fig2_gamma_stability.csv"), {"k", "gamma", "se", "ci_lo", "ci_hi", "ok"});
  for (const auto& pt : trace) {
    st.cell(pt.k).cell(pt.gamma).cell(pt.se).cell(pt.ci_lo).cell(pt.ci_hi).cell(std::string(pt.ok ? "1" : "0"));
    st.end_row();
  }
  st.close();

  const std::size_t window = std::min(o.window, n);
  const double frac = o.window_fraction > 0.0 ? o.window_fraction
                                              : static_cast<double>(exc.k) / static_cast<double>(n);
  const auto moving = moving_window_trace(d.values, window, frac, d.kind, o.window_step);
  CsvWriter mw(r.file("fig2_moving_window.csv"),
               {"window_start", "start_date", "end_date", "k", "gamma", "se", "ci_lo", "ci_hi", "ok"});
  for (const auto& pt : moving) {
    mw.cell(pt.index)
        .cell(format_iso_date(d.ingest.records[pt.index].date))
        .cell(format_iso_date(d.ingest.records[pt.index + window - 1].date))
        .cell(pt.k).cell(pt.gamma).cell(pt.se).cell(pt.ci_lo).cell(pt.ci_hi)
        .cell(std::string(pt.ok ? "1" : "0"));
    mw.end_row();
  }
  mw.close();
  const auto failed = [](const std::vector<TracePoint>& t) {
    return static_cast<std::size_t>(std::count_if(t.begin(), t.end(), [](const TracePoint& p) { return !p.ok; }));
  };
  r.doc["stability_trace"] = {{"k_min", o.k_min}, {"k_max", k_max}, {"failed_fits", failed(trace)}};
  r.doc["moving_window"] = {{"window", window}, {"fraction", frac}, {"step", o.window_step},
                            {"windows", moving.size()}, {"failed_fits", failed(moving)}};
  r.finish("fit.json");
}

void cmd_mcmc(const CLI::App& sub, const Options& o) {
  Report r("mcmc", sub, o);
  const auto p = sample_posterior(o);
  base_sections(r, o, p);
  CsvWriter dr(r.file("posterior_draws.csv"), {"chain", "draw", "gamma", "sigma"});
  const std::size_t per_chain = p.post.size() / p.post.chains;
  for (std::size_t i = 0; i < p.post.size(); ++i) {
    dr.cell(i / per_chain).cell(i % per_chain).cell(p.post.draws[i].gamma()).cell(p.post.draws[i].sigma());
    dr.end_row();
  }
  dr.close();
  CsvWriter h(r.file("fig2_posterior_hist.csv"), {"parameter", "bin_lo", "bin_hi", "density"});
  for (const auto& [name, values] : {std::pair{std::string("gamma"), p.post.gammas()},
                                     std::pair{std::string("sigma"), p.post.sigmas()}}) {
    for (const auto& bin : histogram(values, 50)) {
      h.cell(name).cell(bin.lo).cell(bin.hi).cell(bin.density);
      h.end_row();
    }
  }
  h.close();
  r.finish("mcmc.json");
}

void cmd_quantiles(const CLI::App& sub, const Options& o) {
  Report r("quantiles", sub, o);
  const auto p = sample_posterior(o);
  base_sections(r, o, p);
  CsvWriter q(r.file("quantiles.csv"), {"tau_e", "tau_star", "mean", "ci_lo", "ci_hi"});
  CsvWriter h(r.file("quantile_hist.csv"), {"tau_e", "bin_lo", "bin_hi", "density"});
  json rows = json::array();
  for (double tau_e : tau_e_levels(o, {0.99, 0.995, 0.999, 0.9995})) {
    const auto spec = PredictiveSpec::from_exceedances(p.exc, tau_e);
    const auto draws = posterior_extreme_quantile(p.post, p.exc, spec.tau_star);
    const auto s = summarize(draws, o.level);
    q.cell(tau_e).cell(spec.tau_star).cell(s.mean).cell(s.lo).cell(s.hi);
    q.end_row();
    for (const auto& bin : histogram(draws, 50)) {
      h.cell(tau_e).cell(bin.lo).cell(bin.hi).cell(bin.density);
      h.end_row();
    }
    rows.push_back({{"tau_e", tau_e}, {"tau_star", spec.tau_star}, {"quantile", summary_json(s)}});
  }
  q.close();
  h.close();
  r.doc["quantiles"] = rows;
  r.finish("quantiles.json");
}

void cmd_predict(const CLI::App& sub, const Options& o) {
  Report r("predict", sub, o);
  const auto p = sample_posterior(o);
  base_sections(r, o, p);
  const auto conditioning = parse_conditioning(o.conditioning);
  CsvWriter cv(r.file("predictive_curve.csv"), {"tau_e", "y", "cdf", "density"});
  CsvWriter iv(r.file("predictive_intervals.csv"),
               {"tau_e", "tau_star", "conditioning_threshold", "median", "pi_lo", "pi_hi"});
  json rows = json::array();
  for (double tau_e : tau_e_levels(o, {0.99, 0.995, 0.999, 0.9995})) {
    auto spec = PredictiveSpec::from_exceedances(p.exc, tau_e);
    const auto t_e = summarize(posterior_extreme_quantile(p.post, p.exc, spec.tau_star), o.level);
    if (conditioning == WhatIfConditioning::PosteriorMean) {
      spec.conditioning_threshold = p.exc.kind == ModelKind::Discrete ? std::round(t_e.mean) : t_e.mean;
    }
    const auto band = predictive_interval(p.post, spec, o.level);
    const double median = predictive_quantile(p.post, spec, 0.5);
    const double lo = predictive_quantile(p.post, spec, 0.001);
    const double hi = predictive_quantile(p.post, spec, 0.995);
    std::vector<double> grid;
    const std::size_t pts = std::max<std::size_t>(o.points, 2);
    for (std::size_t i = 0; i < pts; ++i) {
      double y = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(pts - 1);
      if (p.exc.kind == ModelKind::Discrete) y = std::round(y);
      if (grid.empty() || y != grid.back()) grid.push_back(y);
    }
    const auto curve = posterior_predictive(p.post, spec, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      cv.cell(tau_e).cell(grid[i]).cell(curve.cdf[i]).cell(curve.density[i]);
      cv.end_row();
    }
    const double cond = spec.conditioning_threshold.value_or(NAN);
    iv.cell(tau_e).cell(spec.tau_star).cell(cond).cell(median).cell(band.lo).cell(band.hi);
    iv.end_row();
    rows.push_back({{"tau_e", tau_e},
                    {"tau_star", spec.tau_star},
                    {"extreme_threshold", summary_json(t_e)},
                    {"conditioning_threshold", spec.conditioning_threshold ? json(cond) : json(nullptr)},
                    {"median", median},
                    {"pi_lo", band.lo},
                    {"pi_hi", band.hi}});
  }
  cv.close();
  iv.close();
  r.doc["predictive"] = rows;
  r.finish("predict.json");
}

void cmd_whatif(const CLI::App& sub, const Options& o) {
  Report r("whatif", sub, o);
  const auto p = sample_posterior(o);
  base_sections(r, o, p);
  std::vector<double> levels{p.exc.tau_i};
  for (double t : tau_e_levels(o, {0.99, 0.995, 0.999, 0.9995})) levels.push_back(t);
  const auto rows = whatif_sweep(p.post, p.exc, levels, o.level, parse_conditioning(o.conditioning));

  CsvWriter head(r.file("table1_intermediate.csv"), {"tau_i", "t_i", "pi_lo", "pi_hi"});
  head.cell(p.exc.tau_i).cell(p.exc.threshold).cell(rows[0].predictive.lo).cell(rows[0].predictive.hi);
  head.end_row();
  head.close();
  CsvWriter t(r.file("table1_whatif.csv"),
              {"tau_e", "tau_star", "t_e_mean", "t_e_ci_lo", "t_e_ci_hi", "pi_lo", "pi_hi"});
  json out = json::array();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& w = rows[i];
    t.cell(w.tau_e).cell(w.tau_star).cell(w.threshold.mean).cell(w.threshold.lo).cell(w.threshold.hi)
        .cell(w.predictive.lo).cell(w.predictive.hi);
    t.end_row();
    out.push_back({{"tau_e", w.tau_e},
                   {"tau_star", w.tau_star},
                   {"t_e", summary_json(w.threshold)},
                   {"pi_lo", w.predictive.lo},
                   {"pi_hi", w.predictive.hi}});
  }
  t.close();
  r.doc["intermediate"] = {{"tau_i", p.exc.tau_i},
                           {"t_i", p.exc.threshold},
                           {"pi_lo", rows[0].predictive.lo},
                           {"pi_hi", rows[0].predictive.hi}};
  r.doc["whatif"] = out;
  r.finish("whatif.json");
}

void cmd_rl(const CLI::App& sub, const Options& o) {
  if (o.horizon_end.empty()) throw InvalidInput("--horizon-end is required for rl");
  Report r("rl", sub, o);
  const auto p = sample_posterior(o);
  base_sections(r, o, p);
  const auto last = p.data.ingest.records.back().date;
  const auto horizon = parse_iso_date(o.horizon_end);
  if (horizon <= last) throw InvalidInput("--horizon-end must fall after the last observation");
  const double n = static_cast<double>(p.exc.n);
  const double k = static_cast<double>(p.exc.k);
  const auto t_min = static_cast<long>(std::ceil(n / (o.ratio * k) - 1e-9));
  const auto admissible = [&](long t) { return 1.0 / (o.ratio * static_cast<double>(t)) <= k / n * (1.0 + 1e-12); };

  std::vector<std::chrono::sys_days> series;
  const long span = (horizon - last).count();
  if (t_min <= span) {
    for (long t = std::max<long>(t_min, 1); t < span; t += static_cast<long>(std::max<std::size_t>(o.series_step, 1))) {
      if (admissible(t)) series.push_back(last + std::chrono::days(t));
    }
    series.push_back(horizon);
  }
  std::vector<std::chrono::sys_days> years;
  std::vector<std::string> skipped;
  for (const auto d : year_ends(last, horizon)) {
    if (admissible((d - last).count())) years.push_back(d);
    else skipped.push_back(format_iso_date(d));
  }
  std::set<std::chrono::sys_days> all(series.begin(), series.end());
  all.insert(years.begin(), years.end());
  std::vector<double> periods;
  for (const auto d : all) periods.push_back(static_cast<double>((d - last).count()));
  const auto rows = rl_forecast(p.post, p.exc, periods, o.ratio, o.level);
  std::map<std::chrono::sys_days, ReturnLevelRow> by_date;
  std::size_t i = 0;
  for (const auto d : all) by_date.emplace(d, rows[i++]);

  const auto emit = [&](CsvWriter& w, const ReturnLevelRow& row) {
    w.cell(row.period).cell(row.k).cell(row.intermediate_threshold).cell(row.level.mean).cell(row.level.lo)
        .cell(row.level.hi).cell(row.point_forecast).cell(row.predictive.lo).cell(row.predictive.hi);
    w.end_row();
  };
  CsvWriter t(r.file("table2_return_levels.csv"),
              {"year", "date", "period", "k", "threshold", "rl_mean", "rl_ci_lo", "rl_ci_hi", "point_forecast",
               "pi_lo", "pi_hi"});
  json table = json::array();
  for (const auto d : years) {
    const auto& row = by_date.at(d);
    t.cell(std::to_string(static_cast<int>(std::chrono::year_month_day{d}.year()))).cell(format_iso_date(d));
    emit(t, row);
    table.push_back({{"date", format_iso_date(d)},
                     {"period", row.period},
                     {"rl", summary_json(row.level)},
                     {"point_forecast", row.point_forecast},
                     {"pi_lo", row.predictive.lo},
                     {"pi_hi", row.predictive.hi}});
  }
  t.close();
  CsvWriter f(r.file("fig3_return_levels.csv"),
              {"date", "period", "k", "threshold", "rl_mean", "rl_ci_lo", "rl_ci_hi", "point_forecast", "pi_lo",
               "pi_hi"});
  for (const auto d : series) {
    f.cell(format_iso_date(d));
    emit(f, by_date.at(d));
  }
  f.close();
  r.doc["return_levels"] = {{"last_observation", format_iso_date(last)},
                            {"horizon_end", o.horizon_end},
                            {"ratio", o.ratio},
                            {"min_period", t_min},
                            {"skipped_year_ends", skipped},
                            {"table", table}};
  r.finish("rl.json");
}

struct CovariateData {
  std::vector<double> xs;
  std::chrono::sys_days first;
  std::chrono::sys_days horizon;
  bool from_dates = true;
};

CovariateData covariates(const Options& o, const Dataset& d) {
  CovariateData c{{}, d.ingest.records.front().date, horizon_or_last(o, d), o.x_col.empty()};
  if (c.from_dates) {
    c.xs = normalized_time(d.ingest.records, c.horizon);
  } else {
    for (const auto& rec : d.ingest.records) c.xs.push_back(*rec.x);
  }
  return c;
}

std::string date_at(const CovariateData& c, double x) {
  if (!c.from_dates) return "";
  const double span = static_cast<double>((c.horizon - c.first).count());
  return format_iso_date(c.first + std::chrono::days(static_cast<long>(std::llround(x * span))));
}

void cmd_scedasis(const CLI::App& sub, const Options& o) {
  Report r("scedasis", sub, o);
  const auto p = sample_posterior(o);
  base_sections(r, o, p);
  const auto cov = covariates(o, p.data);
  const auto con = concomitants(cov.xs, p.data.values, p.exc.k);
  const auto last = p.data.ingest.records.back().date;

  std::set<double> grid_set;
  const std::size_t g = std::max<std::size_t>(o.grid, 2);
  for (std::size_t j = 0; j < g; ++j) grid_set.insert(static_cast<double>(j) / static_cast<double>(g - 1));
  const double span = static_cast<double>((cov.horizon - cov.first).count());
  std::vector<std::pair<std::chrono::sys_days, double>> table_points;
  if (cov.from_dates) {
    for (const auto d : year_ends(last, cov.horizon)) {
      const double x = static_cast<double>((d - cov.first).count()) / span;
      table_points.emplace_back(d, x);
      grid_set.insert(x);
    }
  }
  const std::vector<double> grid(grid_set.begin(), grid_set.end());
  const double dp_mass = o.dp_mass > 0.0 ? o.dp_mass : default_dp_mass(o.bw);
  const auto sced = scedasis_posterior(con, o.bw, dp_mass, grid, p.post.size(), derive_seed(o.seed, kScedasisStream));

  const double tail = 1.0 - p.exc.tau_i;
  const double curve_tau_e = o.tau_e.empty() ? 0.999 : o.tau_e.front();
  const double curve_star = (1.0 - curve_tau_e) / tail;
  const double pred_star = (1.0 - o.pred_tau_e) / tail;
  if (!(curve_star > 0.0 && curve_star <= 1.0) || !(pred_star > 0.0 && pred_star <= 1.0)) {
    throw InvalidInput("extreme levels must satisfy tau_I <= tau_E < 1");
  }
  const auto conditioning = parse_conditioning(o.conditioning);
  const auto interval_at = [&](double x, double tau_star) {
    PredictiveSpec spec = PredictiveSpec::from_exceedances(p.exc, 1.0 - tau_star * tail);
    spec.tau_star = tau_star;
    if (conditioning == WhatIfConditioning::PosteriorMean) {
      const auto q = conditional_quantile_posterior(p.post, sced, p.exc, tau_star, x);
      const double mean = summarize(q, o.level).mean;
      spec.conditioning_threshold = p.exc.kind == ModelKind::Discrete ? std::round(mean) : mean;
    }
    return conditional_predictive_interval(p.post, sced, spec, x, o.level);
  };

  CsvWriter sc(r.file("fig4_scedasis.csv"), {"x", "date", "c_mean", "c_ci_lo", "c_ci_hi"});
  CsvWriter cq(r.file("fig4_conditional_quantile.csv"),
               {"x", "date", "q_mean", "q_ci_lo", "q_ci_hi", "pi_lo", "pi_hi"});
  std::size_t clamped = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid[j];
    const auto c = summarize(sced.column(j), o.level);
    sc.cell(x).cell(date_at(cov, x)).cell(c.mean).cell(c.lo).cell(c.hi);
    sc.end_row();
    const auto q = summarize(conditional_quantile_posterior(p.post, sced, p.exc, curve_star, x), o.level);
    const auto iv = interval_at(x, pred_star);
    clamped += iv.clamped;
    cq.cell(x).cell(date_at(cov, x)).cell(q.mean).cell(q.lo).cell(q.hi).cell(iv.interval.lo).cell(iv.interval.hi);
    cq.end_row();
  }
  sc.close();
  cq.close();

  CsvWriter t(r.file("table4_conditional.csv"),
              {"year", "date", "x", "period", "tau_e", "q_mean", "q_ci_lo", "q_ci_hi", "pi_lo", "pi_hi"});
  json table = json::array();
  std::vector<std::string> skipped;
  for (const auto& [d, x] : table_points) {
    const double period = static_cast<double>((d - last).count());
    const double tau_star = (1.0 / period) / tail;
    if (tau_star > 1.0) {
      skipped.push_back(format_iso_date(d));
      continue;
    }
    const auto q = summarize(conditional_quantile_posterior(p.post, sced, p.exc, tau_star, x), o.level);
    const auto iv = interval_at(x, pred_star);
    t.cell(std::to_string(static_cast<int>(std::chrono::year_month_day{d}.year()))).cell(format_iso_date(d))
        .cell(x).cell(period).cell(1.0 - 1.0 / period).cell(q.mean).cell(q.lo).cell(q.hi)
        .cell(iv.interval.lo).cell(iv.interval.hi);
    t.end_row();
    table.push_back({{"date", format_iso_date(d)}, {"x", x}, {"period", period},
                     {"quantile", summary_json(q)}, {"pi_lo", iv.interval.lo}, {"pi_hi", iv.interval.hi}});
  }
  t.close();
  r.doc["scedasis"] = {{"bandwidth", o.bw},
                       {"dp_mass", dp_mass},
                       {"grid_points", grid.size()},
                       {"seed_stream", kScedasisStream},
                       {"horizon_end", format_iso_date(cov.horizon)},
                       {"curve_tau_e", curve_tau_e},
                       {"predictive_tau_e", o.pred_tau_e},
                       {"clamped_draws", clamped},
                       {"skipped_year_ends", skipped},
                       {"table", table}};
  r.finish("scedasis.json");
}

void cmd_sced_test(const CLI::App& sub, const Options& o) {
  Report r("sced-test", sub, o);
  const Dataset d = load(o);
  const auto exc = build_exceedances(d.values, choose_k(o, d.values.size()), d.kind);
  const auto cov = covariates(o, d);
  const auto con = concomitants(cov.xs, d.values, exc.k);
  const auto res = heteroscedasticity_test(con, o.mc_reps, derive_seed(o.seed, kTestStream), o.alpha);
  const std::string label = o.label.empty() ? fs::path(o.data).stem().string() : o.label;
  CsvWriter t(r.file("table3_test.csv"),
              {"dataset", "statistic", "critical_value", "p_value", "k", "mc_reps", "reject"});
  t.cell(label).cell(res.statistic).cell(res.critical_value).cell(res.p_value).cell(res.k).cell(res.mc_reps)
      .cell(std::string(res.reject() ? "1" : "0"));
  t.end_row();
  t.close();
  r.doc["data"] = data_json(o, d);
  r.doc["exceedances"] = exceedance_json(exc);
  r.doc["test"] = {{"dataset", label},
                   {"statistic", res.statistic},
                   {"critical_value", res.critical_value},
                   {"p_value", res.p_value},
                   {"alpha", res.alpha},
                   {"k", res.k},
                   {"mc_reps", res.mc_reps},
                   {"seed_stream", kTestStream},
                   {"reject", res.reject()}};
  r.finish("sced_test.json");
}

void cmd_simulate(const CLI::App& sub, const Options& o) {
  Report r("simulate", sub, o);
  const sim::GeneratorSpec spec{sim::parse_family(o.family), o.a, o.b, o.n, o.seed};
  const auto s = sim::generate(spec);
  sim::write_csv(r.file("data.csv").string(), s, o.first_date);
  const auto [mn, mx] = std::minmax_element(s.ys.begin(), s.ys.end());
  r.doc["sample"] = {{"family", std::string(sim::to_string(spec.family))},
                     {"a", spec.a},
                     {"b", spec.b},
                     {"n", spec.n},
                     {"seed", spec.seed},
                     {"min", *mn},
                     {"max", *mx},
                     {"covariate", !s.xs.empty()}};
  r.finish("simulate.json");
}

// ---------------------------------------------------------------- wiring

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "Read options from a key = value file; flags given on the command line win");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_flag("--fixed-report", o.fixed_report, "Omit the timestamp from JSON reports");
}

void add_data(CLI::App* sub, Options& o) {
  sub->add_option("--data", o.data, "Input CSV with a header row");
  sub->add_option("--date-col", o.date_col, "Date column (YYYY-MM-DD)");
  sub->add_option("--value-col", o.value_col, "Value column");
  sub->add_option("--x-col", o.x_col, "Covariate column in [0, 1] (default: normalized dates)");
  sub->add_option("--kind", o.kind, "continuous or discrete")->check(CLI::IsMember({"continuous", "discrete"}));
  sub->add_option("--k", o.k, "Effective sample size (overrides --tau-i and --fraction)");
  sub->add_option("--tau-i", o.tau_i, "Intermediate level; k = round((1 - tau_i) n)");
  sub->add_option("--fraction", o.fraction, "Sample fraction k/n when neither --k nor --tau-i is set");
  sub->add_option("--level", o.level, "Credible / predictive level");
}

void add_mcmc(CLI::App* sub, Options& o) {
  sub->add_option("--M", o.M, "Posterior draws per chain");
  sub->add_option("--burnin", o.burnin, "Burn-in iterations per chain");
  sub->add_option("--chains", o.chains, "Independent chains (seed streams 0..chains-1)");
  sub->add_option("--thin", o.thin, "Keep every thin-th draw");
}

}  // namespace

// Splices the entries of a subcommand's --config file into the argument list, ahead of the
// explicit flags, skipping keys that are also given on the command line.
std::vector<std::string> expand_config(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2 || args[1].starts_with("-")) return args;
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 2; i < args.size(); ++i) {
    const auto& a = args[i];
    if (!a.starts_with("--")) continue;
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(key);
    if (key != "config") continue;
    if (eq != std::string::npos) {
      path = a.substr(eq + 1);
    } else if (i + 1 < args.size()) {
      path = args[i + 1];
    }
  }
  if (path.empty()) return args;
  std::vector<std::string> spliced;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (!item.parents.empty() && item.parents != std::vector<std::string>{args[1]}) continue;
    if (given.contains(item.name)) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") spliced.push_back("--" + item.name);
      continue;
    }
    for (const auto& v : item.inputs) {
      spliced.push_back("--" + item.name);
      spliced.push_back(v);
    }
  }
  args.insert(args.begin() + 2, spliced.begin(), spliced.end());
  return args;
}

int run(int argc, const char* const* argv) {
  Options o;
  CLI::App app{"Peaks-over-threshold predictive inference for extreme events", "tailcast"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::map<std::string, void (*)(const CLI::App&, const Options&)> handlers;
  const auto make = [&](const std::string& name, const std::string& help, auto handler) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    handlers[name] = handler;
    return sub;
  };

  auto* fit = make("fit", "ML fit with gamma stability and moving-window traces", cmd_fit);
  add_data(fit, o);
  fit->add_option("--k-min", o.k_min, "Smallest k of the stability trace");
  fit->add_option("--k-max", o.k_max, "Largest k of the stability trace");
  fit->add_option("--window", o.window, "Moving-window length in observations");
  fit->add_option("--window-fraction", o.window_fraction, "Sample fraction inside each window (default k/n)");
  fit->add_option("--window-step", o.window_step, "Moving-window step in observations");

  auto* mcmc = make("mcmc", "Posterior sampling of (gamma, sigma)", cmd_mcmc);
  add_data(mcmc, o);
  add_mcmc(mcmc, o);

  auto* quantiles = make("quantiles", "Posterior of extreme quantiles", cmd_quantiles);
  add_data(quantiles, o);
  add_mcmc(quantiles, o);
  quantiles->add_option("--tau-e", o.tau_e, "Extreme level (repeatable)");

  auto* predict = make("predict", "Posterior predictive of tail events", cmd_predict);
  add_data(predict, o);
  add_mcmc(predict, o);
  predict->add_option("--tau-e", o.tau_e, "Extreme level (repeatable)");
  predict->add_option("--points", o.points, "Evaluation points per curve");
  predict->add_option("--conditioning", o.conditioning, "mean or per-draw")
      ->check(CLI::IsMember({"mean", "per-draw"}));

  auto* whatif = make("whatif", "What-if table over extreme levels", cmd_whatif);
  add_data(whatif, o);
  add_mcmc(whatif, o);
  whatif->add_option("--tau-e", o.tau_e, "Extreme level (repeatable)");
  whatif->add_option("--conditioning", o.conditioning, "mean or per-draw")
      ->check(CLI::IsMember({"mean", "per-draw"}));

  auto* rl = make("rl", "Return-level forecasts up to a horizon date", cmd_rl);
  add_data(rl, o);
  add_mcmc(rl, o);
  rl->add_option("--horizon-end", o.horizon_end, "Last forecast date (YYYY-MM-DD)");
  rl->add_option("--ratio", o.ratio, "tau* kept fixed across return periods");
  rl->add_option("--series-step", o.series_step, "Days between points of the return-level series");

  auto* sced = make("scedasis", "Scedasis posterior and conditional forecasts", cmd_scedasis);
  add_data(sced, o);
  add_mcmc(sced, o);
  sced->add_option("--bw", o.bw, "Ball radius in normalized time");
  sced->add_option("--dp-mass", o.dp_mass, "Dirichlet-process base mass (default 5 bw)");
  sced->add_option("--grid", o.grid, "Evaluation points on [0, 1]");
  sced->add_option("--horizon-end", o.horizon_end, "Date mapped to x = 1 (default: last observation)");
  sced->add_option("--tau-e", o.tau_e, "Extreme level of the conditional quantile curve");
  sced->add_option("--pred-tau-e", o.pred_tau_e, "Extreme level of the conditional predictive intervals");
  sced->add_option("--conditioning", o.conditioning, "mean or per-draw")
      ->check(CLI::IsMember({"mean", "per-draw"}));

  auto* test = make("sced-test", "Test of a constant scedasis", cmd_sced_test);
  add_data(test, o);
  test->add_option("--horizon-end", o.horizon_end, "Date mapped to x = 1 (default: last observation)");
  test->add_option("--mc-reps", o.mc_reps, "Monte Carlo replicates of the null law");
  test->add_option("--alpha", o.alpha, "Test level");
  test->add_option("--label", o.label, "Dataset label in the table (default: file stem)");

  auto* simulate = make("simulate", "Write a synthetic dataset", cmd_simulate);
  simulate->add_option("--family", o.family, "exact-gp, pareto, frechet, burr, floored-gp, hetero-pareto");
  simulate->add_option("--a", o.a, "First family parameter");
  simulate->add_option("--b", o.b, "Second family parameter");
  simulate->add_option("--n", o.n, "Sample size");
  simulate->add_option("--first-date", o.first_date, "Date of the first row");

  try {
    auto args = expand_config(argc, argv);
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const json err{{"error", {{"code", "usage"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    handlers.at(name)(*chosen, o);
  } catch (const Error& e) {
    json err{{"code", e.code()}, {"message", e.what()}, {"command", name}};
    if (const auto* eb = dynamic_cast<const EmptyBall*>(&e)) err["point"] = eb->point();
    if (const auto* ff = dynamic_cast<const FitFailure*>(&e)) {
      err["best_gamma"] = ff->best_gamma();
      err["best_sigma"] = ff->best_sigma();
    }
    std::cerr << json{{"error", err}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}, {"command", name}}}}.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace tailcast::cli
