#include "istb/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "istb/io.hpp"
#include "istb/stats.hpp"

namespace istb {
namespace bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string resolve(const fs::path& base, const std::string& rel) {
  if (rel.empty()) return "";
  fs::path p(rel);
  if (p.is_absolute()) return p.string();
  return (base / p).lexically_normal().string();
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t period,
                          std::uint64_t lane) {
  Rng r(seed);
  return r.derive(period * 16 + lane).next();
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c.schema = j.value("schema", 1);
    if (c.schema != 1) throw ConfigError("unsupported config schema");
    const fs::path base = fs::path(path).parent_path();
    const auto& data = j.at("data");
    c.catalog_path = resolve(base, data.at("catalog").get<std::string>());
    c.hydraulics_path = resolve(base, data.at("hydraulics").get<std::string>());
    c.pre_stim_path =
        resolve(base, data.value("pre_stimulation_hydraulics", ""));
    if (j.contains("well_tip")) {
      auto wt = j.at("well_tip");
      for (int i = 0; i < 3; ++i) c.well_tip[i] = wt.at(i).get<double>();
    }
    c.mc = j.at("mc").get<double>();
    if (j.contains("grid")) {
      c.grid_extent_m = j["grid"].value("extent_m", 4000.0);
      c.grid_voxel_m = j["grid"].value("voxel_m", 200.0);
    }
    if (j.contains("windows")) {
      const auto& w = j["windows"];
      c.first_learning_end = w.value("first_learning_end_s", 108000.0);
      c.ftw = w.value("ftw_s", 21600.0);
      c.horizon = w.value("horizon_s", 259200.0);
      c.recal_step = w.value("recal_step_s", 21600.0);
    }
    if (j.contains("magnitude")) {
      c.n_mag_bins = j["magnitude"].value("n_bins", 31);
      if (j["magnitude"].contains("truncated_top"))
        c.truncated_top = j["magnitude"]["truncated_top"].get<double>();
    }
    if (j.contains("planned_flow")) {
      for (const auto& s : j["planned_flow"])
        c.plan.steps.push_back(
            {s.at("t_s").get<double>(), s.at("flow_lps").get<double>()});
      c.plan_supplied = true;
    }
    const auto& models = j.at("models");
    if (models.contains("sass")) {
      const auto& m = models["sass"];
      c.sass.enabled = m.value("enabled", true);
      c.sass.n_trials = m.value("n_trials", 1000);
    }
    if (models.contains("hysei")) {
      const auto& m = models["hysei"];
      c.hysei.enabled = m.value("enabled", true);
      c.hysei.n_realizations = m.value("n_realizations", 100);
      c.hysei.surprise = m.value("surprise", 0.01);
      auto& sp = c.hysei.seeds;
      sp.n_seeds = m.value("n_seeds", 100000);
      sp.d_tau = m.value("d_tau_pa", sp.d_tau);
      sp.d_mu = m.value("d_mu_pa", sp.d_mu);
      sp.b_max = m.value("b_max", sp.b_max);
      sp.b_min = m.value("b_min", sp.b_min);
      sp.sigma_d_min = m.value("sigma_d_min_pa", sp.sigma_d_min);
      sp.sigma_d_max = m.value("sigma_d_max_pa", sp.sigma_d_max);
      sp.threshold_max = m.value("threshold_max_pa", 0.0);
      if (m.contains("mesh")) {
        const auto& mm = m["mesh"];
        auto& mesh = c.hysei.mesh;
        mesh.radius = mm.value("radius_m", mesh.radius);
        mesh.n_nodes = mm.value("n_nodes", mesh.n_nodes);
        mesh.dt = mm.value("dt_s", mesh.dt);
      }
      if (m.contains("inversion")) {
        const auto& inv = m["inversion"];
        c.hysei.inversion_max_evals = inv.value("max_evals", 300);
        c.hysei.inversion_restarts = inv.value("restarts", 3);
        if (inv.contains("bounds")) {
          const auto& b = inv["bounds"];
          auto& bb = c.hysei.bounds;
          bb.kappa0_lo = b.value("kappa0_lo", bb.kappa0_lo);
          bb.kappa0_hi = b.value("kappa0_hi", bb.kappa0_hi);
          bb.S_lo = b.value("S_lo", bb.S_lo);
          bb.S_hi = b.value("S_hi", bb.S_hi);
          bb.C_u_lo = b.value("C_u_lo", bb.C_u_lo);
          bb.C_u_hi = b.value("C_u_hi", bb.C_u_hi);
          bb.u_t_lo = b.value("u_t_lo", bb.u_t_lo);
          bb.u_t_hi = b.value("u_t_hi", bb.u_t_hi);
          bb.p_t_lo = b.value("p_t_lo", bb.p_t_lo);
          bb.p_t_hi = b.value("p_t_hi", bb.p_t_hi);
        }
      }
    }
    c.seed = j.value("seed", 0ULL);
    c.out_dir = resolve(base, j.value("out_dir", "out"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  validate_config(c);
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (!c.sass.enabled && !c.hysei.enabled)
    throw ConfigError("at least one model must be enabled");
  if (!fs::exists(c.catalog_path))
    throw ConfigError("catalog file not found: " + c.catalog_path);
  if (!fs::exists(c.hydraulics_path))
    throw ConfigError("hydraulics file not found: " + c.hydraulics_path);
  if (!c.pre_stim_path.empty() && !fs::exists(c.pre_stim_path))
    throw ConfigError("pre-stimulation file not found: " + c.pre_stim_path);
  if (c.mc != c.mc) throw ConfigError("mc must be set");
  TimeWindows w{c.first_learning_end, c.ftw, c.horizon, c.recal_step};
  try {
    w.validate();
    VoxelGrid probe(c.grid_extent_m, c.grid_voxel_m);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

scenario::ScenarioSpec load_scenario_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario spec " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario spec parse error: ") + e.what());
  }
  scenario::ScenarioSpec s;
  try {
    for (const auto& st : j.at("stages"))
      s.stages.push_back(
          {st.at("t_s").get<double>(), st.at("flow_lps").get<double>()});
    s.duration = j.at("duration_s").get<double>();
    s.sigma_index = j.at("sigma_index").get<double>();
    s.b = j.at("b").get<double>();
    s.p = j.value("p", 2.0);
    s.mc = j.value("mc", 0.0);
    s.diffusivity = j.value("diffusivity_m2s", 0.05);
    s.anisotropy_y = j.value("anisotropy_y", 1.0);
    s.anisotropy_z = j.value("anisotropy_z", 1.0);
    if (j.contains("clip_magnitude"))
      s.clip_magnitude = j["clip_magnitude"].get<double>();
    s.pressure_gain = j.value("pressure_gain_mpa_per_lps", 0.3);
    s.pressure_tau = j.value("pressure_tau_s", 7200.0);
    s.seed = j.value("seed", 1ULL);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario spec error: ") + e.what());
  }
  return s;
}

std::string cell_status_name(CellStatus s) {
  switch (s) {
    case CellStatus::Pass: return "pass";
    case CellStatus::FailOver: return "fail-over";
    case CellStatus::FailUnder: return "fail-under";
    case CellStatus::NoEvent: return "no-event";
    case CellStatus::ModelError: return "model-error";
  }
  return "?";
}

std::vector<Forecast> forecast_for_period(const ExperimentConfig& config,
                                          const SeismicCatalog& catalog,
                                          const HydraulicSeries& hydraulics,
                                          const HydraulicSeries& pre_stim,
                                          const std::string& model,
                                          double learning_end,
                                          std::uint64_t period_index) {
  // The pseudo-prospectivity boundary: nothing past learning_end is
  // visible to model calibration.
  const SeismicCatalog masked_cat = catalog.up_to(learning_end);
  const HydraulicSeries masked_hyd = hydraulics.up_to(learning_end);
  const TimeWindows windows{learning_end, config.ftw, config.horizon,
                            config.recal_step};
  const VoxelGrid grid(config.grid_extent_m, config.grid_voxel_m);

  if (model == "sass") {
    sass::SassForecastOptions opts;
    opts.n_trials = config.sass.n_trials;
    opts.n_mag_bins = config.n_mag_bins;
    opts.truncated_top = config.truncated_top;
    return sass::sass_forecast(masked_cat, masked_hyd, config.plan, windows,
                               grid, config.mc,
                               stream_seed(config.seed, period_index, 1), opts)
        .ftws;
  }
  if (model == "hysei") {
    hysei::HyseiOptions opts;
    opts.n_realizations = config.hysei.n_realizations;
    opts.surprise = config.hysei.surprise;
    opts.n_mag_bins = config.n_mag_bins;
    opts.truncated_top = config.truncated_top;
    opts.mesh = config.hysei.mesh;
    opts.bounds = config.hysei.bounds;
    opts.inversion_max_evals = config.hysei.inversion_max_evals;
    opts.inversion_restarts = config.hysei.inversion_restarts;
    return hysei::hysei_forecast(masked_cat, masked_hyd, pre_stim, config.plan,
                                 windows, grid, config.mc, config.hysei.seeds,
                                 stream_seed(config.seed, period_index, 2),
                                 opts)
        .ftws;
  }
  throw ConfigError("unknown model: " + model);
}

namespace {

void evaluate_period(const ExperimentConfig& config, const VoxelGrid& grid,
                     const SeismicCatalog& catalog,
                     const std::vector<std::vector<SeismicEvent>>& observed,
                     PeriodResult& pr, std::uint64_t period_index,
                     std::uint64_t lane) {
  const double L = pr.learning_end;
  const int n_ftw = static_cast<int>(config.horizon / config.ftw + 0.5);
  pr.ftws.resize(n_ftw);
  Rng eval_rng(stream_seed(config.seed, period_index, lane + 8));
  for (int k = 0; k < n_ftw; ++k) {
    FtwResult& cell = pr.ftws[k];
    const Forecast& f = pr.forecasts[k];
    const auto& events = observed[k];
    cell.forecast_count = f.expected_count;
    cell.observed_count = static_cast<long>(events.size());

    const auto nt = eval::n_test(f.expected_count, cell.observed_count);
    cell.n_status = nt.pass ? CellStatus::Pass
                            : (nt.overprediction ? CellStatus::FailOver
                                                 : CellStatus::FailUnder);
    cell.ll_number = poisson_log_pmf(
        cell.observed_count, std::max(f.expected_count, eval::kRateFloor));

    // magnitude component LL of this FTW's events
    cell.ll_magnitude = 0.0;
    for (const auto& e : events)
      cell.ll_magnitude += std::log(std::max(
          f.magnitudes.probs[f.magnitudes.bin_of(e.m)], eval::kRateFloor));

    Rng s_rng = eval_rng.derive(2 * k);
    if (events.empty()) {
      cell.s_status = CellStatus::NoEvent;
      cell.ll_space = 0.0;
    } else {
      const auto st = eval::s_test(f, events, grid, 1000, s_rng);
      cell.s_status = st.pass ? CellStatus::Pass : CellStatus::FailUnder;
      cell.ll_space = st.statistic;
      cell.ll_space_per_eqk = eval::ll_per_eqk(st.statistic,
                                               cell.observed_count);
    }

    // cumulative magnitude test over [L, end of FTW k]
    std::vector<double> mags;
    for (int kk = 0; kk <= k; ++kk)
      for (const auto& e : observed[kk]) mags.push_back(e.m);
    Rng m_rng = eval_rng.derive(2 * k + 1);
    const auto mt = eval::m_test(f.magnitudes, mags, 1000, m_rng);
    cell.m_status = mt.no_events
                        ? CellStatus::NoEvent
                        : (mt.pass ? CellStatus::Pass : CellStatus::FailUnder);
  }
}

}  // namespace

EvaluationReport run_experiment(const ExperimentConfig& config, int jobs) {
  SeismicCatalog catalog;
  HydraulicSeries hydraulics, pre_stim;
  try {
    catalog = load_catalog(config.catalog_path, config.mc, config.well_tip)
                  .catalog;
    hydraulics = load_hydraulics(config.hydraulics_path);
    if (!config.pre_stim_path.empty())
      pre_stim = load_hydraulics(config.pre_stim_path);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  if (catalog.empty()) throw DataError("catalog is empty after filtering");
  if (hydraulics.samples.size() < 2) throw DataError("hydraulics too short");

  EvaluationReport report;
  report.data_end = std::max(catalog.last_time(), hydraulics.last_time());
  for (double L = config.first_learning_end;
       L + config.ftw <= report.data_end + 1e-6; L += config.recal_step)
    report.learning_ends.push_back(L);
  if (report.learning_ends.empty())
    throw DataError("no learning period fits in the data span");

  const VoxelGrid grid(config.grid_extent_m, config.grid_voxel_m);
  const int n_ftw = static_cast<int>(config.horizon / config.ftw + 0.5);
  const std::size_t n_periods = report.learning_ends.size();

  // Shared evaluation targets (the held-out observations).
  report.observed.resize(n_periods);
  for (std::size_t pi = 0; pi < n_periods; ++pi) {
    report.observed[pi].resize(n_ftw);
    const double L = report.learning_ends[pi];
    for (int k = 0; k < n_ftw; ++k) {
      const double t1 = L + k * config.ftw;
      report.observed[pi][k] = catalog.slice(t1, t1 + config.ftw).events;
    }
  }

  std::vector<std::string> model_ids;
  if (config.sass.enabled) model_ids.push_back("sass");
  if (config.hysei.enabled) model_ids.push_back("hysei");
  for (const auto& id : model_ids) {
    ModelResults mr;
    mr.id = id;
    mr.periods.resize(n_periods);
    report.models.push_back(std::move(mr));
  }

  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n_periods)));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t pi = next.fetch_add(1);
      if (pi >= n_periods) return;
      const double L = report.learning_ends[pi];
      for (std::size_t mi = 0; mi < model_ids.size(); ++mi) {
        PeriodResult& pr = report.models[mi].periods[pi];
        pr.learning_end = L;
        try {
          pr.forecasts = forecast_for_period(config, catalog, hydraulics,
                                             pre_stim, model_ids[mi], L, pi);
          evaluate_period(config, grid, catalog, report.observed[pi], pr, pi,
                          mi);
        } catch (const std::exception& e) {
          pr.model_error = true;
          pr.error = e.what();
          pr.forecasts.clear();
          pr.ftws.assign(n_ftw, FtwResult{});
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (std::size_t pi = 0; pi < n_periods; ++pi)
    for (int k = 0; k < n_ftw; ++k)
      for (const auto& e : report.observed[pi][k]) {
        bool clamped = false;
        grid.index_clamped(e.x, e.y, e.z, &clamped);
        if (clamped) ++report.clamped_events;
      }
  return report;
}

namespace {

const ModelResults& find_model(const EvaluationReport& report,
                               const std::string& id) {
  for (const auto& m : report.models)
    if (m.id == id) return m;
  throw std::invalid_argument("model not in report: " + id);
}

}  // namespace

ComparisonTables compare_models(const EvaluationReport& report,
                                const ExperimentConfig& config,
                                const std::string& model_a,
                                const std::string& model_b) {
  const auto& ma = find_model(report, model_a);
  const auto& mb = find_model(report, model_b);
  const VoxelGrid grid(config.grid_extent_m, config.grid_voxel_m);
  ComparisonTables out;
  out.model_a = model_a;
  out.model_b = model_b;
  const std::size_t n_periods = report.learning_ends.size();
  const double nan = std::nan("");

  for (std::size_t pi = 0; pi < n_periods; ++pi) {
    const auto& pa = ma.periods[pi];
    const auto& pb = mb.periods[pi];
    const std::size_t n_ftw = report.observed[pi].size();
    std::vector<double> dn(n_ftw, nan), dm(n_ftw, nan), ds(n_ftw, nan),
        dc(n_ftw, nan);
    if (!pa.model_error && !pb.model_error) {
      for (std::size_t k = 0; k < n_ftw; ++k) {
        const auto& ca = pa.ftws[k];
        const auto& cb = pb.ftws[k];
        dn[k] = ca.ll_number - cb.ll_number;
        dm[k] = ca.ll_magnitude - cb.ll_magnitude;
        ds[k] = ca.ll_space - cb.ll_space;
        dc[k] = dn[k] + dm[k] + ds[k];
        auto g = eval::information_gain(pa.forecasts[k], pb.forecasts[k],
                                        report.observed[pi][k], grid,
                                        static_cast<int>(k));
        out.gains.insert(out.gains.end(), g.begin(), g.end());
      }
    }
    out.d_number.push_back(std::move(dn));
    out.d_magnitude.push_back(std::move(dm));
    out.d_space.push_back(std::move(ds));
    out.d_combined.push_back(std::move(dc));
  }

  // Gain summaries per horizon (FTWs pooled across the experiment).
  const int n_ftw_total = static_cast<int>(config.horizon / config.ftw + 0.5);
  std::vector<int> horizons;
  for (int k : {1, 4, 8, 12})
    if (k <= n_ftw_total) horizons.push_back(k);
  if (horizons.empty() || horizons.back() != n_ftw_total)
    horizons.push_back(n_ftw_total);
  Rng rng(config.seed ^ 0x636f6d70ULL);
  for (int h : horizons) {
    std::vector<double> samples;
    for (const auto& g : out.gains)
      if (g.ftw < h) samples.push_back(g.value);
    if (samples.empty()) continue;
    const double hours = h * config.ftw / 3600.0;
    for (auto est : {eval::GainEstimator::Classical, eval::GainEstimator::Robust,
                     eval::GainEstimator::BootMean,
                     eval::GainEstimator::BootMedian}) {
      Rng r = rng.derive(static_cast<std::uint64_t>(h * 8 +
                                                    static_cast<int>(est)));
      const auto s = eval::summarize_gain(samples, est, 1000, r);
      char key[64];
      std::snprintf(key, sizeof(key), "%s_h%g", eval::estimator_name(est).c_str(),
                    hours);
      out.summaries[key] = s;
    }
  }
  return out;
}

namespace {

std::string matrix_csv(const EvaluationReport& report,
                       const std::function<std::string(std::size_t, std::size_t)>& cell,
                       std::size_t n_ftw) {
  std::string out = "learning_end_s";
  for (std::size_t k = 0; k < n_ftw; ++k)
    out += ",ftw_" + std::to_string(k + 1);
  out += "\n";
  for (std::size_t pi = 0; pi < report.learning_ends.size(); ++pi) {
    out += fmt(report.learning_ends[pi]);
    for (std::size_t k = 0; k < n_ftw; ++k) out += "," + cell(pi, k);
    out += "\n";
  }
  return out;
}

json summary_to_json(const eval::GainSummary& s) {
  json j;
  j["estimator"] = eval::estimator_name(s.estimator);
  j["value"] = s.value;
  j["n"] = s.n;
  j["has_ci"] = s.has_ci;
  if (s.has_ci) {
    j["ci_lo"] = s.ci_lo;
    j["ci_hi"] = s.ci_hi;
    j["significant"] = s.significant;
  }
  return j;
}

}  // namespace

void emit_report(const EvaluationReport& report, const ExperimentConfig& config,
                 const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::size_t n_ftw =
      report.observed.empty() ? 0 : report.observed[0].size();
  const fs::path dir(out_dir);

  for (const auto& m : report.models) {
    auto cell = [&](auto field) {
      return [&, field](std::size_t pi, std::size_t k) -> std::string {
        const auto& pr = m.periods[pi];
        if (pr.model_error) return "model-error";
        return field(pr.ftws[k]);
      };
    };
    write_file_atomic(
        (dir / ("ntest_" + m.id + ".csv")).string(),
        matrix_csv(report, cell([](const FtwResult& c) {
                     return cell_status_name(c.n_status);
                   }),
                   n_ftw));
    write_file_atomic(
        (dir / ("stest_" + m.id + ".csv")).string(),
        matrix_csv(report, cell([](const FtwResult& c) {
                     return cell_status_name(c.s_status);
                   }),
                   n_ftw));
    write_file_atomic(
        (dir / ("mtest_" + m.id + ".csv")).string(),
        matrix_csv(report, cell([](const FtwResult& c) {
                     return cell_status_name(c.m_status);
                   }),
                   n_ftw));
    write_file_atomic(
        (dir / ("forecast_counts_" + m.id + ".csv")).string(),
        matrix_csv(report, cell([](const FtwResult& c) {
                     return fmt(c.forecast_count);
                   }),
                   n_ftw));
    write_file_atomic(
        (dir / ("ll_number_" + m.id + ".csv")).string(),
        matrix_csv(report,
                   cell([](const FtwResult& c) { return fmt(c.ll_number); }),
                   n_ftw));
    write_file_atomic(
        (dir / ("ll_magnitude_" + m.id + ".csv")).string(),
        matrix_csv(report,
                   cell([](const FtwResult& c) { return fmt(c.ll_magnitude); }),
                   n_ftw));
    write_file_atomic(
        (dir / ("ll_space_" + m.id + ".csv")).string(),
        matrix_csv(report,
                   cell([](const FtwResult& c) { return fmt(c.ll_space); }),
                   n_ftw));
    write_file_atomic(
        (dir / ("ll_space_per_eqk_" + m.id + ".csv")).string(),
        matrix_csv(report, cell([](const FtwResult& c) {
                     return c.ll_space_per_eqk ? fmt(*c.ll_space_per_eqk)
                                               : std::string("no-event");
                   }),
                   n_ftw));

    // Cumulative combined LL per earthquake for 6/24/48/72 h horizons.
    std::string cum = "learning_end_s";
    std::vector<int> hs;
    for (int k : {1, 4, 8, 12})
      if (k <= static_cast<int>(n_ftw)) hs.push_back(k);
    for (int h : hs)
      cum += ",ll_per_eqk_h" + std::to_string(
                                   static_cast<int>(h * config.ftw / 3600.0));
    cum += "\n";
    for (std::size_t pi = 0; pi < report.learning_ends.size(); ++pi) {
      cum += fmt(report.learning_ends[pi]);
      const auto& pr = m.periods[pi];
      for (int h : hs) {
        if (pr.model_error) {
          cum += ",model-error";
          continue;
        }
        double ll = 0.0;
        long n_obs = 0;
        for (int k = 0; k < h; ++k) {
          const auto& c = pr.ftws[k];
          ll += c.ll_number + c.ll_magnitude + c.ll_space;
          n_obs += c.observed_count;
        }
        cum += n_obs > 0 ? "," + fmt(ll / n_obs) : ",no-event";
      }
      cum += "\n";
    }
    write_file_atomic((dir / ("cumulative_ll_eqk_" + m.id + ".csv")).string(),
                      cum);
  }

  write_file_atomic(
      (dir / "observed_counts.csv").string(),
      matrix_csv(report,
                 [&](std::size_t pi, std::size_t k) {
                   return std::to_string(report.observed[pi][k].size());
                 },
                 n_ftw));

  json summary;
  summary["schema"] = 1;
  summary["version"] = "istb 0.1.0";
  summary["seed"] = config.seed;
  summary["mc"] = config.mc;
  summary["grid"] = {{"extent_m", config.grid_extent_m},
                     {"voxel_m", config.grid_voxel_m}};
  summary["windows"] = {{"first_learning_end_s", config.first_learning_end},
                        {"ftw_s", config.ftw},
                        {"horizon_s", config.horizon},
                        {"recal_step_s", config.recal_step}};
  summary["learning_ends"] = report.learning_ends;
  summary["data_end_s"] = report.data_end;
  summary["clamped_events"] = report.clamped_events;
  summary["planned_flow_supplied"] = config.plan_supplied;
  if (!config.plan_supplied)
    summary["planned_flow_note"] =
        "no planned schedule configured; last observed flow rate held constant";
  for (const auto& m : report.models) {
    json jm;
    std::size_t errors = 0;
    for (const auto& p : m.periods) errors += p.model_error ? 1 : 0;
    jm["periods"] = m.periods.size();
    jm["model_error_periods"] = errors;
    summary["models"][m.id] = jm;
  }
  write_file_atomic((dir / "summary.json").string(), summary.dump(2) + "\n");
}

void emit_comparison(const ComparisonTables& tables,
                     const EvaluationReport& report,
                     const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const std::string tag = tables.model_a + "_minus_" + tables.model_b;
  const std::size_t n_ftw =
      report.observed.empty() ? 0 : report.observed[0].size();

  auto emit_matrix = [&](const std::string& name,
                         const std::vector<std::vector<double>>& m) {
    write_file_atomic(
        (dir / ("lldiff_" + name + "_" + tag + ".csv")).string(),
        matrix_csv(report,
                   [&](std::size_t pi, std::size_t k) -> std::string {
                     const double v = m[pi][k];
                     return std::isnan(v) ? "model-error" : fmt(v);
                   },
                   n_ftw));
  };
  emit_matrix("number", tables.d_number);
  emit_matrix("magnitude", tables.d_magnitude);
  emit_matrix("space", tables.d_space);
  emit_matrix("combined", tables.d_combined);

  std::string g = "ftw,voxel,gain\n";
  for (const auto& s : tables.gains)
    g += std::to_string(s.ftw) + "," + std::to_string(s.voxel) + "," +
         fmt(s.value) + "\n";
  write_file_atomic(
      (dir / ("gains_" + tables.model_a + "_vs_" + tables.model_b + ".csv"))
          .string(),
      g);

  json j;
  j["model_a"] = tables.model_a;
  j["model_b"] = tables.model_b;
  j["n_gain_samples"] = tables.gains.size();
  for (const auto& [key, s] : tables.summaries) {
    json js = summary_to_json(s);
    js["probability_gain"] = eval::exponentiate_gain(s.value);
    j["gain_summaries"][key] = js;
  }
  write_file_atomic((dir / ("comparison_" + tables.model_a + "_vs_" +
                            tables.model_b + ".json"))
                        .string(),
                    j.dump(2) + "\n");
}

}  // namespace bench
}  // namespace istb
