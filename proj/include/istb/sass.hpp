#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "istb/rng.hpp"
#include "istb/types.hpp"

namespace istb {
namespace sass {

// Seismogenic-index rate law parameters plus the post-shut-in decay.
struct SassParams {
  double sigma_index = 0.0;  // seismogenic index
  double b = 1.0;            // GR slope
  double p = 2.0;            // decay exponent, floored at 2
  double r0a = 0.0;          // mean stimulation-period rate, events/s
  double t0 = 0.0;           // stimulation length (shut-in time), s
};

struct SmoothingConfig {
  double sigma1 = 200.0;  // EW bandwidth, m
  double sigma2 = 200.0;  // NS bandwidth, m
  double sigma3 = 200.0;  // vertical bandwidth, m
  double surprise = 0.01; // fraction of the PDF spread uniformly
  double tau_w = 86400.0; // temporal e-folding time, s
};

// Sigma = log10(Q_c) - b*mc - log10(N_mc), with Q_c the cumulative
// injected volume (m^3) at learning_end and N_mc the number of learning
// events at or above mc.
double estimate_sigma_index(const SeismicCatalog& catalog,
                            const HydraulicSeries& hydraulics,
                            double learning_end, double mc, double b);

// Expected count over [t1, t2] during stimulation:
// N(t) = Q_c(t) * 10^(-b*mc - sigma). Q_c beyond learning_end extends
// the observed series with the planned flow schedule.
double forecast_count_stimulation(const SassParams& params,
                                  const InjectionPlan& plan,
                                  const HydraulicSeries& hydraulics,
                                  double learning_end, double t1, double t2,
                                  double mc);

// Log-log least-squares fit of the post-shut-in rate decay over FTW bins
// of the learning period; returns max(fit, 2), or 2 when fewer than two
// nonempty bins exist.
double fit_decay_p(const SeismicCatalog& catalog, double shut_in,
                   double learning_end, double ftw_length);

// Integral of r0a / (t/t0)^p over [t1, t2] (t1 >= shut-in).
double forecast_count_post(const SassParams& params, double t1, double t2);

// Gaussian kernel mass of one event inside a voxel (triple product of
// error-function differences over 8).
double kernel_mass(const SeismicEvent& event, double x1, double x2, double y1,
                   double y2, double z1, double z2, double s1, double s2,
                   double s3);

struct SpatialPdfResult {
  VoxelGrid pdf;
  bool empty_catalog = false;  // uniform fallback was used
  double leaked_mass = 0.0;    // kernel mass outside the grid, pre-normalization
};

// PDF_i = (1-eps) * sum_e w_e K_e,i / sum_e w_e M_e + eps/n, with
// w_e = exp(-(now - t_e)/tau_w) and M_e the event's in-grid kernel mass.
SpatialPdfResult build_spatial_pdf(const SeismicCatalog& catalog,
                                   const VoxelGrid& grid,
                                   const SmoothingConfig& config, double now);

struct SmoothingSearchResult {
  SmoothingConfig config;
  double validation_ll = 0.0;
  bool degenerate = false;  // split impossible or no validation events
};

// Samples n_trials configurations log-uniformly (bandwidths 25..1000 m,
// surprise 1e-3..0.5, tau_w 0.25*ftw..4*learning length) and keeps the
// one maximizing the Poisson joint LL of the validation events under the
// training-set PDF. The learning split follows the half/forecast-length
// rule; falls back to `previous` (or defaults) when the search is
// degenerate.
SmoothingSearchResult optimize_smoothing(
    const SeismicCatalog& learning, const VoxelGrid& grid, double learning_end,
    const TimeWindows& windows, int n_trials, std::uint64_t seed,
    const std::optional<SmoothingConfig>& previous = std::nullopt);

struct SassForecastOptions {
  int n_trials = 1000;
  int n_mag_bins = 31;
  std::optional<double> truncated_top;  // Soultz-style magnitude clipping
  std::optional<SmoothingConfig> previous_smoothing;
  std::optional<SmoothingConfig> fixed_smoothing;  // skip the search
};

struct SassForecastResult {
  std::vector<Forecast> ftws;
  SassParams params;
  SmoothingConfig smoothing;
};

// Full SaSS recalibration + per-FTW forecast for one learning period.
SassForecastResult sass_forecast(const SeismicCatalog& learning_catalog,
                                 const HydraulicSeries& learning_hydraulics,
                                 const InjectionPlan& plan,
                                 const TimeWindows& windows,
                                 const VoxelGrid& grid, double mc,
                                 std::uint64_t seed,
                                 const SassForecastOptions& opts = {});

}  // namespace sass
}  // namespace istb
