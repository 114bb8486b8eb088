#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "istb/evaluation.hpp"
#include "istb/hysei.hpp"
#include "istb/sass.hpp"
#include "istb/scenario.hpp"
#include "istb/types.hpp"

namespace istb {
namespace bench {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SassConfig {
  bool enabled = false;
  int n_trials = 1000;
};

struct HyseiConfig {
  bool enabled = false;
  int n_realizations = 100;
  hysei::SeedModelParams seeds;
  double surprise = 0.01;
  hysei::MeshSpec mesh;
  hysei::InversionBounds bounds;
  int inversion_max_evals = 300;
  int inversion_restarts = 3;
};

struct ExperimentConfig {
  int schema = 1;
  std::string catalog_path;
  std::string hydraulics_path;
  std::string pre_stim_path;  // optional, empty when absent
  std::array<double, 3> well_tip{0.0, 0.0, 0.0};
  double mc = 0.0;
  double grid_extent_m = 4000.0;
  double grid_voxel_m = 200.0;
  double first_learning_end = 108000.0;  // 1.25 days
  double ftw = 21600.0;
  double horizon = 259200.0;
  double recal_step = 21600.0;
  int n_mag_bins = 31;
  std::optional<double> truncated_top;
  InjectionPlan plan;
  bool plan_supplied = false;
  SassConfig sass;
  HyseiConfig hysei;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

// Parses the JSON experiment config; paths resolve relative to the file.
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& config);

scenario::ScenarioSpec load_scenario_spec(const std::string& path);

enum class CellStatus { Pass, FailOver, FailUnder, NoEvent, ModelError };
std::string cell_status_name(CellStatus s);

struct FtwResult {
  CellStatus n_status = CellStatus::ModelError;
  CellStatus s_status = CellStatus::ModelError;
  CellStatus m_status = CellStatus::ModelError;  // cumulative magnitude test
  double forecast_count = 0.0;
  long observed_count = 0;
  double ll_number = 0.0;
  double ll_magnitude = 0.0;
  double ll_space = 0.0;  // joint LL of the count-normalized grid
  std::optional<double> ll_space_per_eqk;
};

struct PeriodResult {
  double learning_end = 0.0;
  bool model_error = false;
  std::string error;
  std::vector<FtwResult> ftws;
  std::vector<Forecast> forecasts;  // kept for model comparison
};

struct ModelResults {
  std::string id;
  std::vector<PeriodResult> periods;
};

struct EvaluationReport {
  std::vector<double> learning_ends;
  std::vector<ModelResults> models;
  // observed events per (period, ftw), the shared evaluation target
  std::vector<std::vector<std::vector<SeismicEvent>>> observed;
  std::size_t clamped_events = 0;  // off-grid events clamped for S accounting
  double data_end = 0.0;
};

EvaluationReport run_experiment(const ExperimentConfig& config, int jobs = 0);

struct ComparisonTables {
  std::string model_a, model_b;
  // per (period, ftw) LL differences (A - B); NaN where either side errored
  std::vector<std::vector<double>> d_number, d_magnitude, d_space, d_combined;
  std::vector<eval::GainSample> gains;  // pooled; GainSample.ftw is the FTW index
  // estimator x horizon summaries; horizons: 6, 24, 48, 72 hours
  std::map<std::string, eval::GainSummary> summaries;
};

ComparisonTables compare_models(const EvaluationReport& report,
                                const ExperimentConfig& config,
                                const std::string& model_a,
                                const std::string& model_b);

// CSV matrices + JSON summary into out_dir (atomic overwrite).
void emit_report(const EvaluationReport& report, const ExperimentConfig& config,
                 const std::string& out_dir);
void emit_comparison(const ComparisonTables& tables,
                     const EvaluationReport& report,
                     const std::string& out_dir);

// Forecasts of one model for one learning period, built strictly from
// data masked at learning_end (the pseudo-prospectivity boundary).
std::vector<Forecast> forecast_for_period(const ExperimentConfig& config,
                                          const SeismicCatalog& catalog,
                                          const HydraulicSeries& hydraulics,
                                          const HydraulicSeries& pre_stim,
                                          const std::string& model,
                                          double learning_end,
                                          std::uint64_t period_index);

}  // namespace bench
}  // namespace istb
