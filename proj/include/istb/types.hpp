#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace istb {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Coordinates are meters relative to the well tip (x East, y North,
// z up-positive depth offset). Times are seconds since the start of
// stimulation.
struct SeismicEvent {
  double t = 0.0;
  double x = 0.0, y = 0.0, z = 0.0;
  double m = 0.0;
};

struct SeismicCatalog {
  std::vector<SeismicEvent> events;  // sorted by t
  double mc = -kInf;                 // magnitude of completeness

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }

  // Events with t in [t0, t1).
  SeismicCatalog slice(double t0, double t1) const;
  // Events with t <= t_end (a pseudo-prospective mask).
  SeismicCatalog up_to(double t_end) const;
  std::size_t count_in(double t0, double t1) const;
  double last_time() const { return events.empty() ? 0.0 : events.back().t; }
};

struct HydraulicSample {
  double t = 0.0;
  double flow_lps = 0.0;  // injection flow rate, liters per second
  double whp_mpa = 0.0;   // wellhead pressure, MPa
};

struct HydraulicSeries {
  std::vector<HydraulicSample> samples;  // nondecreasing t
  double shut_in_time = kInf;            // first t after which flow stays 0

  bool empty() const { return samples.empty(); }
  double last_time() const { return samples.empty() ? 0.0 : samples.back().t; }

  // Linear interpolation; constant extrapolation outside the sampled span.
  double flow_at(double t) const;
  double pressure_at(double t) const;

  // Cumulative injected volume in m^3 by trapezoidal integration of the
  // flow rate from the first sample to time t.
  double cumulative_volume_m3(double t) const;

  // Samples with t <= t_end; shut_in_time is kept only if already reached.
  HydraulicSeries up_to(double t_end) const;

  // Derives shut_in_time from the samples: the earliest time after which
  // the recorded flow is identically zero.
  void detect_shut_in();
};

// A step-function injection plan used to extend Q_c past the learning end.
struct InjectionPlan {
  struct Step {
    double t = 0.0;         // step start
    double flow_lps = 0.0;  // rate from t until the next step
  };
  std::vector<Step> steps;  // sorted by t; empty means "hold last observed"

  double flow_at(double t, double fallback) const;
  // Integral of planned flow over [t0, t1] in m^3.
  double volume_m3(double t0, double t1, double fallback) const;
  // First time >= t0 at which planned flow becomes (and stays) zero.
  double shut_in_after(double t0, double fallback) const;
};

struct TimeWindows {
  double learning_end = 0.0;
  double ftw_length = 21600.0;   // 6 h
  double horizon = 259200.0;     // 72 h
  double recal_step = 21600.0;   // 6 h

  int n_ftw() const { return static_cast<int>(horizon / ftw_length + 0.5); }
  void validate() const;
};

// Cubic voxel grid centered on the well tip. Values are either rates or
// probabilities depending on context.
class VoxelGrid {
 public:
  explicit VoxelGrid(double extent_m = 4000.0, double voxel_m = 200.0);

  int per_axis() const { return per_axis_; }
  int n() const { return per_axis_ * per_axis_ * per_axis_; }
  double extent() const { return extent_; }
  double voxel() const { return voxel_; }

  // Lower edge of bin k along one axis.
  double edge(int k) const { return -0.5 * extent_ + k * voxel_; }

  int axis_bin_clamped(double c) const;
  std::optional<int> index_of(double x, double y, double z) const;
  // Nearest-voxel index; sets *clamped when the point lies off the grid.
  int index_clamped(double x, double y, double z, bool* clamped = nullptr) const;
  int flat(int ix, int iy, int iz) const {
    return (ix * per_axis_ + iy) * per_axis_ + iz;
  }

  double sum() const;
  void normalize();  // scale so sum() == 1
  void fill(double v);

  std::vector<double> values;

 private:
  double extent_;
  double voxel_;
  int per_axis_;
};

struct MagnitudePMF {
  double m_min = 0.0;
  double bin_width = 0.1;
  std::vector<double> probs;
  bool truncated_top = false;  // final bin absorbs the tail

  int bin_of(double m) const;  // clamped into [0, probs.size())
  void validate() const;
};

// The unit exchanged between models and the evaluation layer: one FTW's
// forecast of event count, magnitude distribution and spatial PDF.
struct Forecast {
  double expected_count = 0.0;
  MagnitudePMF magnitudes;
  VoxelGrid spatial_pdf;  // probabilities, sum == 1
  std::string model_id;
  double learning_end = 0.0;
  double t_start = 0.0, t_end = 0.0;  // the FTW this forecast covers

  VoxelGrid rate_grid() const;  // expected_count * spatial_pdf
};

}  // namespace istb
