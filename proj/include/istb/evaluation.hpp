#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "istb/rng.hpp"
#include "istb/types.hpp"

namespace istb {
namespace eval {

// Every rate entering a log is floored here; invocations are counted.
constexpr double kRateFloor = 1e-12;

enum class TestKind { Number, Magnitude, Space };

struct TestOutcome {
  TestKind kind = TestKind::Number;
  bool pass = true;
  bool no_events = false;      // vacuous outcome (no observed earthquakes)
  double statistic = 0.0;      // observed count (N) or LL (M/S)
  double ref_lo = 0.0;         // CI bound or percentile threshold
  double ref_hi = 0.0;
  bool overprediction = false;  // N-test: observed below the CI
  bool underprediction = false; // N-test: observed above the CI
};

struct GainSample {
  double value = 0.0;  // information gain of A over B, natural-log units
  int voxel = 0;
  int ftw = 0;
};

enum class GainEstimator { Classical, Robust, BootMean, BootMedian };

struct GainSummary {
  GainEstimator estimator = GainEstimator::Classical;
  double value = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  bool has_ci = false;
  bool significant = false;  // CI excludes zero
  std::size_t n = 0;
};

// Pass iff observed falls inside the exact central 95% Poisson interval.
TestOutcome n_test(double forecast_mean, long observed);

// Simulated-percentile multinomial LL test of the magnitude distribution.
TestOutcome m_test(const MagnitudePMF& forecast,
                   const std::vector<double>& observed_magnitudes,
                   int n_sim, Rng& rng);

// Eq.-style Poisson joint log-likelihood over voxels (natural log).
// floor_hits, when given, counts voxels where the rate floor was applied.
double poisson_joint_ll(const VoxelGrid& rates,
                        const std::vector<long>& observed_counts,
                        std::size_t* floor_hits = nullptr);

struct VoxelCounts {
  std::vector<long> counts;
  std::size_t n_clamped = 0;  // events off the grid clamped to the boundary
  long total = 0;
};

VoxelCounts count_events(const std::vector<SeismicEvent>& events,
                         const VoxelGrid& grid);

// Space-test: rate grid rescaled to the observed total, LL compared with
// the 5th percentile of n_sim simulated catalogs.
TestOutcome s_test(const Forecast& forecast,
                   const std::vector<SeismicEvent>& observed,
                   const VoxelGrid& grid, int n_sim, Rng& rng);

// LL divided by the observed event count; nullopt marks "no earthquake".
std::optional<double> ll_per_eqk(double joint_ll, long observed_count);

// Per-earthquake information gain of model A over model B.
std::vector<GainSample> information_gain(const Forecast& a, const Forecast& b,
                                         const std::vector<SeismicEvent>& observed,
                                         const VoxelGrid& grid, int ftw_id = 0);

GainSummary summarize_gain(const std::vector<double>& samples,
                           GainEstimator method, int n_boot, Rng& rng);

double exponentiate_gain(double avg_gain);

std::string estimator_name(GainEstimator e);

}  // namespace eval
}  // namespace istb
