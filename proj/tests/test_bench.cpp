#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "istb/experiment.hpp"
#include "istb/io.hpp"
#include "istb/scenario.hpp"

using namespace istb;
using namespace istb::bench;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A small synthetic stimulation dataset plus a config file, all under a
// fresh temp directory.
struct Fixture {
  fs::path dir;
  std::string config_path;

  explicit Fixture(const std::string& name, double duration_days = 2.5,
                   bool enable_hysei = false) {
    dir = fs::temp_directory_path() / ("istb_bench_" + name);
    fs::create_directories(dir);

    scenario::ScenarioSpec spec;
    spec.stages = {{0.0, 25.0}, {2.0 * 86400.0, 0.0}};
    spec.duration = duration_days * 86400.0;
    spec.sigma_index = 0.0;
    spec.b = 1.1;
    spec.p = 2.5;
    spec.mc = 0.9;
    spec.seed = 12;
    const auto sc = scenario::generate_scenario(spec);
    save_catalog((dir / "catalog.csv").string(), sc.catalog);
    save_hydraulics((dir / "hydraulics.csv").string(), sc.hydraulics);

    nlohmann::json j;
    j["schema"] = 1;
    j["data"] = {{"catalog", "catalog.csv"}, {"hydraulics", "hydraulics.csv"}};
    j["mc"] = 0.9;
    j["windows"] = {{"first_learning_end_s", 108000.0},
                    {"ftw_s", 21600.0},
                    {"horizon_s", 43200.0},
                    {"recal_step_s", 21600.0}};
    j["planned_flow"] = nlohmann::json::array(
        {{{"t_s", 0.0}, {"flow_lps", 25.0}},
         {{"t_s", 2.0 * 86400.0}, {"flow_lps", 0.0}}});
    j["models"]["sass"] = {{"enabled", true}, {"n_trials", 10}};
    j["models"]["hysei"] = {{"enabled", enable_hysei},
                            {"n_realizations", 2},
                            {"n_seeds", 1500},
                            {"inversion", {{"max_evals", 25}, {"restarts", 1}}}};
    j["seed"] = 77;
    j["out_dir"] = "out";
    config_path = (dir / "config.json").string();
    std::ofstream(config_path) << j.dump(2);
  }
};

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("config loading resolves paths and validates") {
  Fixture fx("cfg");
  const auto cfg = load_config(fx.config_path);
  CHECK(cfg.schema == 1);
  CHECK(fs::path(cfg.catalog_path).is_absolute());
  CHECK(fs::exists(cfg.catalog_path));
  CHECK(cfg.mc == doctest::Approx(0.9));
  CHECK(cfg.horizon == doctest::Approx(43200.0));
  CHECK(cfg.sass.enabled);
  CHECK_FALSE(cfg.hysei.enabled);
  CHECK(cfg.plan_supplied);
  CHECK(cfg.seed == 77);
  CHECK(fs::path(cfg.out_dir).filename() == "out");
}

TEST_CASE("config errors: missing file, no model, bad schema") {
  Fixture fx("cfgerr");
  nlohmann::json j = nlohmann::json::parse(slurp(fx.config_path));

  j["data"]["catalog"] = "nope.csv";
  std::ofstream(fx.dir / "bad1.json") << j.dump();
  CHECK_THROWS_AS(load_config((fx.dir / "bad1.json").string()), ConfigError);

  j = nlohmann::json::parse(slurp(fx.config_path));
  j["models"]["sass"]["enabled"] = false;
  std::ofstream(fx.dir / "bad2.json") << j.dump();
  CHECK_THROWS_AS(load_config((fx.dir / "bad2.json").string()), ConfigError);

  j = nlohmann::json::parse(slurp(fx.config_path));
  j["schema"] = 99;
  std::ofstream(fx.dir / "bad3.json") << j.dump();
  CHECK_THROWS_AS(load_config((fx.dir / "bad3.json").string()), ConfigError);

  std::ofstream(fx.dir / "bad4.json") << "{not json";
  CHECK_THROWS_AS(load_config((fx.dir / "bad4.json").string()), ConfigError);
}

TEST_CASE("empty catalog is a data error") {
  Fixture fx("dataerr");
  std::ofstream(fx.dir / "catalog.csv") << "t_s,x_m,y_m,z_m,mw\n";
  const auto cfg = load_config(fx.config_path);
  CHECK_THROWS_AS(run_experiment(cfg, 1), DataError);
}

TEST_CASE("experiment: window arithmetic, statuses, determinism") {
  Fixture fx("run");
  const auto cfg = load_config(fx.config_path);
  const auto report = run_experiment(cfg, 2);

  // learning ends every 6 h from 1.25 d to data end minus one FTW
  REQUIRE(report.learning_ends.size() == 5);
  CHECK(report.learning_ends.front() == doctest::Approx(108000.0));
  CHECK(report.learning_ends.back() == doctest::Approx(194400.0));
  REQUIRE(report.models.size() == 1);
  CHECK(report.models[0].id == "sass");

  const std::set<std::string> allowed{"pass", "fail-over", "fail-under",
                                      "no-event", "model-error"};
  for (const auto& period : report.models[0].periods) {
    CHECK_FALSE(period.model_error);
    REQUIRE(period.ftws.size() == 2);
    for (const auto& cell : period.ftws) {
      CHECK(allowed.count(cell_status_name(cell.n_status)) == 1);
      CHECK(allowed.count(cell_status_name(cell.s_status)) == 1);
      CHECK(allowed.count(cell_status_name(cell.m_status)) == 1);
      if (cell.observed_count == 0) {
        CHECK(cell.s_status == CellStatus::NoEvent);
        CHECK_FALSE(cell.ll_space_per_eqk.has_value());
      }
    }
  }

  // observed counts are the held-out catalog slices
  const auto cat = load_catalog(cfg.catalog_path, cfg.mc).catalog;
  for (std::size_t pi = 0; pi < report.learning_ends.size(); ++pi)
    for (std::size_t k = 0; k < 2; ++k) {
      const double t1 = report.learning_ends[pi] + k * cfg.ftw;
      CHECK(report.observed[pi][k].size() == cat.count_in(t1, t1 + cfg.ftw));
    }

  // byte-identical outputs under the same seed
  emit_report(report, cfg, (fx.dir / "out_a").string());
  const auto report2 = run_experiment(cfg, 1);  // different job count
  emit_report(report2, cfg, (fx.dir / "out_b").string());
  int n_files = 0;
  for (const auto& entry : fs::directory_iterator(fx.dir / "out_a")) {
    const auto other = fx.dir / "out_b" / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
    ++n_files;
  }
  CHECK(n_files >= 10);

  // matrix dimensions: one row per learning period
  std::istringstream ntest(slurp(fx.dir / "out_a" / "ntest_sass.csv"));
  std::string line;
  int rows = -1;  // header
  while (std::getline(ntest, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("pseudo-prospectivity tripwire: future data cannot leak") {
  Fixture fx("tripwire", 2.5, true);
  const auto cfg = load_config(fx.config_path);
  auto cat = load_catalog(cfg.catalog_path, cfg.mc).catalog;
  auto hyd = load_hydraulics(cfg.hydraulics_path);
  const double L = 129600.0;

  for (const std::string model : {"sass", "hysei"}) {
    const auto base =
        forecast_for_period(cfg, cat, hyd, HydraulicSeries{}, model, L, 1);

    // plant a sentinel: a huge event and a wild hydraulic excursion just
    // after the learning boundary
    auto cat2 = cat;
    cat2.events.push_back({L + 600.0, 1500.0, -1500.0, 900.0, 3.9});
    std::sort(cat2.events.begin(), cat2.events.end(),
              [](const auto& a, const auto& b) { return a.t < b.t; });
    auto hyd2 = hyd;
    for (auto& s : hyd2.samples)
      if (s.t > L) {
        s.flow_lps = 90.0;
        s.whp_mpa = 60.0;
      }
    const auto planted =
        forecast_for_period(cfg, cat2, hyd2, HydraulicSeries{}, model, L, 1);

    REQUIRE(base.size() == planted.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      CHECK(base[k].expected_count == planted[k].expected_count);
      CHECK(base[k].spatial_pdf.values == planted[k].spatial_pdf.values);
      CHECK(base[k].magnitudes.probs == planted[k].magnitudes.probs);
    }
  }
}

TEST_CASE("comparison: self-difference is zero, components add up") {
  Fixture fx("cmp", 2.0, true);
  auto cfg = load_config(fx.config_path);
  cfg.hysei.enabled = true;
  const auto report = run_experiment(cfg, 2);
  REQUIRE(report.models.size() == 2);

  const auto self = compare_models(report, cfg, "sass", "sass");
  for (const auto& row : self.d_combined)
    for (const double v : row)
      if (!std::isnan(v)) CHECK(v == doctest::Approx(0.0));
  for (const auto& g : self.gains) CHECK(g.value == doctest::Approx(0.0));

  const auto cross = compare_models(report, cfg, "sass", "hysei");
  for (std::size_t pi = 0; pi < cross.d_combined.size(); ++pi)
    for (std::size_t k = 0; k < cross.d_combined[pi].size(); ++k) {
      const double v = cross.d_combined[pi][k];
      if (std::isnan(v)) continue;
      CHECK(v == doctest::Approx(cross.d_number[pi][k] +
                                 cross.d_magnitude[pi][k] +
                                 cross.d_space[pi][k])
                     .epsilon(1e-12));
    }

  // gain summaries round-trip bit-exactly through the emitted JSON
  emit_comparison(cross, report, (fx.dir / "out").string());
  const auto j = nlohmann::json::parse(
      slurp(fx.dir / "out" / "comparison_sass_vs_hysei.json"));
  for (const auto& [key, summary] : cross.summaries) {
    REQUIRE(j["gain_summaries"].contains(key));
    const auto& js = j["gain_summaries"][key];
    CHECK(js["value"].get<double>() == summary.value);
    if (summary.has_ci) {
      CHECK(js["ci_lo"].get<double>() == summary.ci_lo);
      CHECK(js["ci_hi"].get<double>() == summary.ci_hi);
    }
  }

  // the antisymmetric comparison negates every gain sample
  const auto reversed = compare_models(report, cfg, "hysei", "sass");
  REQUIRE(reversed.gains.size() == cross.gains.size());
  for (std::size_t i = 0; i < cross.gains.size(); ++i)
    CHECK(reversed.gains[i].value ==
          doctest::Approx(-cross.gains[i].value).epsilon(1e-9));
}

TEST_CASE("scenario spec files load through the bench") {
  Fixture fx("spec");
  nlohmann::json j;
  j["stages"] = nlohmann::json::array(
      {{{"t_s", 0.0}, {"flow_lps", 20.0}}, {{"t_s", 3600.0}, {"flow_lps", 0.0}}});
  j["duration_s"] = 7200.0;
  j["sigma_index"] = -1.0;
  j["b"] = 1.0;
  j["mc"] = 0.9;
  j["seed"] = 5;
  const auto path = (fx.dir / "scenario.json").string();
  std::ofstream(path) << j.dump();
  const auto spec = load_scenario_spec(path);
  CHECK(spec.duration == doctest::Approx(7200.0));
  CHECK(spec.stages.size() == 2);
  CHECK(spec.b == doctest::Approx(1.0));
}

}  // TEST_SUITE
