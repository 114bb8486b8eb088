#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "istb/evaluation.hpp"
#include "istb/experiment.hpp"
#include "istb/hysei.hpp"
#include "istb/io.hpp"
#include "istb/rng.hpp"
#include "istb/sass.hpp"
#include "istb/scenario.hpp"
#include "istb/stats.hpp"

namespace py = pybind11;
using namespace istb;

namespace {

py::dict catalog_to_dict(const SeismicCatalog& cat) {
  std::vector<double> t, x, y, z, m;
  for (const auto& e : cat.events) {
    t.push_back(e.t);
    x.push_back(e.x);
    y.push_back(e.y);
    z.push_back(e.z);
    m.push_back(e.m);
  }
  py::dict d;
  d["t_s"] = t;
  d["x_m"] = x;
  d["y_m"] = y;
  d["z_m"] = z;
  d["mw"] = m;
  d["mc"] = cat.mc;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "pseudo-prospective test bench for induced-seismicity "
              "forecast models";

  mod.def(
      "estimate_b_value",
      [](const std::vector<double>& mags, double mc, double bin) {
        return estimate_b_value(mags, mc, bin);
      },
      py::arg("magnitudes"), py::arg("mc"), py::arg("bin") = 0.1,
      "Aki-Utsu maximum-likelihood b-value with half-bin correction.");

  mod.def("sample_gr_magnitude", &sample_gr_magnitude, py::arg("b"),
          py::arg("m_min"), py::arg("u"),
          py::arg("truncated_top") = std::nullopt,
          "Inverse-CDF Gutenberg-Richter magnitude sample.");

  mod.def("poisson_ci95", &poisson_ci95, py::arg("mean"),
          "Exact central 95% Poisson interval (lo, hi).");

  mod.def(
      "n_test",
      [](double forecast_mean, long observed) {
        const auto o = eval::n_test(forecast_mean, observed);
        py::dict d;
        d["pass"] = o.pass;
        d["observed"] = o.statistic;
        d["ci_lo"] = o.ref_lo;
        d["ci_hi"] = o.ref_hi;
        d["overprediction"] = o.overprediction;
        d["underprediction"] = o.underprediction;
        return d;
      },
      py::arg("forecast_mean"), py::arg("observed"),
      "Number test against the exact Poisson 95% interval.");

  mod.def(
      "kernel_mass",
      [](double x, double y, double z, double m, double x1, double x2,
         double y1, double y2, double z1, double z2, double s1, double s2,
         double s3) {
        SeismicEvent e{0.0, x, y, z, m};
        return sass::kernel_mass(e, x1, x2, y1, y2, z1, z2, s1, s2, s3);
      },
      py::arg("x"), py::arg("y"), py::arg("z"), py::arg("m"), py::arg("x1"),
      py::arg("x2"), py::arg("y1"), py::arg("y2"), py::arg("z1"),
      py::arg("z2"), py::arg("s1"), py::arg("s2"), py::arg("s3"),
      "Gaussian kernel mass of one event inside a voxel.");

  mod.def(
      "summarize_gain",
      [](const std::vector<double>& samples, const std::string& estimator,
         int n_boot, std::uint64_t seed) {
        eval::GainEstimator est;
        if (estimator == "classical") est = eval::GainEstimator::Classical;
        else if (estimator == "robust") est = eval::GainEstimator::Robust;
        else if (estimator == "boot_mean") est = eval::GainEstimator::BootMean;
        else if (estimator == "boot_median")
          est = eval::GainEstimator::BootMedian;
        else throw std::invalid_argument("unknown estimator: " + estimator);
        Rng rng(seed);
        const auto s = eval::summarize_gain(samples, est, n_boot, rng);
        py::dict d;
        d["estimator"] = eval::estimator_name(s.estimator);
        d["value"] = s.value;
        d["n"] = s.n;
        d["has_ci"] = s.has_ci;
        if (s.has_ci) {
          d["ci_lo"] = s.ci_lo;
          d["ci_hi"] = s.ci_hi;
          d["significant"] = s.significant;
        }
        return d;
      },
      py::arg("samples"), py::arg("estimator"), py::arg("n_boot") = 1000,
      py::arg("seed") = 1,
      "Average information gain with one of the four estimators "
      "(classical, robust, boot_mean, boot_median).");

  mod.def(
      "generate_scenario",
      [](const std::vector<std::pair<double, double>>& stages,
         double duration_s, double sigma_index, double b, double p, double mc,
         double diffusivity, std::uint64_t seed) {
        scenario::ScenarioSpec spec;
        for (const auto& [t, q] : stages) spec.stages.push_back({t, q});
        spec.duration = duration_s;
        spec.sigma_index = sigma_index;
        spec.b = b;
        spec.p = p;
        spec.mc = mc;
        spec.diffusivity = diffusivity;
        spec.seed = seed;
        const auto sc = scenario::generate_scenario(spec);
        py::dict d;
        d["catalog"] = catalog_to_dict(sc.catalog);
        d["shut_in_s"] = sc.shut_in;
        d["n_events"] = sc.catalog.size();
        return d;
      },
      py::arg("stages"), py::arg("duration_s"), py::arg("sigma_index"),
      py::arg("b"), py::arg("p") = 2.0, py::arg("mc") = 0.0,
      py::arg("diffusivity") = 0.05, py::arg("seed") = 1,
      "Synthetic stimulation scenario; stages are (t_s, flow_lps) pairs.");

  mod.def("scenario_expected_count",
          [](const std::vector<std::pair<double, double>>& stages,
             double duration_s, double sigma_index, double b, double p,
             double mc, double t0, double t1) {
            scenario::ScenarioSpec spec;
            for (const auto& [t, q] : stages) spec.stages.push_back({t, q});
            spec.duration = duration_s;
            spec.sigma_index = sigma_index;
            spec.b = b;
            spec.p = p;
            spec.mc = mc;
            return scenario::scenario_expected_count(spec, t0, t1);
          },
          py::arg("stages"), py::arg("duration_s"), py::arg("sigma_index"),
          py::arg("b"), py::arg("p"), py::arg("mc"), py::arg("t0"),
          py::arg("t1"),
          "Integral of the generating intensity over [t0, t1].");

  mod.def(
      "load_catalog",
      [](const std::string& path, double mc) {
        const auto res = load_catalog(path, mc);
        py::dict d = catalog_to_dict(res.catalog);
        d["n_below_mc"] = res.n_below_mc;
        d["was_unsorted"] = res.was_unsorted;
        return d;
      },
      py::arg("path"), py::arg("mc"),
      "Load a catalog CSV (t_s,x_m,y_m,z_m,mw) filtered at mc.");

  mod.def(
      "validate_config",
      [](const std::string& path) {
        bench::load_config(path);
        return true;
      },
      py::arg("path"), "Parse and validate an experiment config.");

  mod.def(
      "run_experiment",
      [](const std::string& config_path, const std::string& out_dir,
         std::optional<std::uint64_t> seed, int jobs) {
        auto config = bench::load_config(config_path);
        if (seed) config.seed = *seed;
        if (!out_dir.empty()) config.out_dir = out_dir;
        const auto report = bench::run_experiment(config, jobs);
        bench::emit_report(report, config, config.out_dir);
        if (config.sass.enabled && config.hysei.enabled) {
          const auto tables =
              bench::compare_models(report, config, "sass", "hysei");
          bench::emit_comparison(tables, report, config.out_dir);
        }
        py::dict d;
        d["out_dir"] = config.out_dir;
        d["learning_ends"] = report.learning_ends;
        py::dict models;
        for (const auto& m : report.models) {
          std::size_t errors = 0;
          for (const auto& p : m.periods)
            if (p.model_error) ++errors;
          models[m.id.c_str()] = py::dict(
              py::arg("periods") = m.periods.size(),
              py::arg("model_error_periods") = errors);
        }
        d["models"] = models;
        return d;
      },
      py::arg("config_path"), py::arg("out_dir") = "",
      py::arg("seed") = std::nullopt, py::arg("jobs") = 0,
      "Run the full pseudo-prospective experiment and write the report.");

  py::register_exception<bench::ConfigError>(mod, "ConfigError");
  py::register_exception<bench::DataError>(mod, "DataError");
}
