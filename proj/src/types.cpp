#include "istb/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace istb {

SeismicCatalog SeismicCatalog::slice(double t0, double t1) const {
  SeismicCatalog out;
  out.mc = mc;
  for (const auto& e : events)
    if (e.t >= t0 && e.t < t1) out.events.push_back(e);
  return out;
}

SeismicCatalog SeismicCatalog::up_to(double t_end) const {
  SeismicCatalog out;
  out.mc = mc;
  for (const auto& e : events)
    if (e.t <= t_end) out.events.push_back(e);
  return out;
}

std::size_t SeismicCatalog::count_in(double t0, double t1) const {
  std::size_t n = 0;
  for (const auto& e : events)
    if (e.t >= t0 && e.t < t1) ++n;
  return n;
}

namespace {

double interp(const std::vector<HydraulicSample>& s, double t,
              double HydraulicSample::*field) {
  if (s.empty()) return 0.0;
  if (t <= s.front().t) return s.front().*field;
  if (t >= s.back().t) return s.back().*field;
  auto it = std::lower_bound(
      s.begin(), s.end(), t,
      [](const HydraulicSample& a, double v) { return a.t < v; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  if (hi.t == lo.t) return hi.*field;
  const double f = (t - lo.t) / (hi.t - lo.t);
  return lo.*field + f * (hi.*field - lo.*field);
}

}  // namespace

double HydraulicSeries::flow_at(double t) const {
  return interp(samples, t, &HydraulicSample::flow_lps);
}

double HydraulicSeries::pressure_at(double t) const {
  return interp(samples, t, &HydraulicSample::whp_mpa);
}

double HydraulicSeries::cumulative_volume_m3(double t) const {
  if (samples.size() < 2) return 0.0;
  double v = 0.0;  // liters
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const auto& a = samples[i - 1];
    const auto& b = samples[i];
    if (t <= a.t) break;
    if (t >= b.t) {
      v += 0.5 * (a.flow_lps + b.flow_lps) * (b.t - a.t);
    } else {
      const double ft = flow_at(t);
      v += 0.5 * (a.flow_lps + ft) * (t - a.t);
      break;
    }
  }
  if (t > samples.back().t)  // constant extrapolation of the last rate
    v += samples.back().flow_lps * (t - samples.back().t);
  return v / 1000.0;
}

HydraulicSeries HydraulicSeries::up_to(double t_end) const {
  HydraulicSeries out;
  for (const auto& s : samples)
    if (s.t <= t_end) out.samples.push_back(s);
  out.shut_in_time = (shut_in_time <= t_end) ? shut_in_time : kInf;
  return out;
}

void HydraulicSeries::detect_shut_in() {
  shut_in_time = kInf;
  bool saw_flow = false;
  for (const auto& s : samples) saw_flow = saw_flow || s.flow_lps > 0.0;
  if (!saw_flow) return;
  // Walk backwards over the trailing zero-flow span.
  std::size_t i = samples.size();
  while (i > 0 && samples[i - 1].flow_lps == 0.0) --i;
  if (i < samples.size()) shut_in_time = samples[i].t;
}

double InjectionPlan::flow_at(double t, double fallback) const {
  if (steps.empty()) return fallback;
  if (t < steps.front().t) return fallback;
  double r = fallback;
  for (const auto& s : steps) {
    if (s.t <= t) r = s.flow_lps;
    else break;
  }
  return r;
}

double InjectionPlan::volume_m3(double t0, double t1, double fallback) const {
  if (t1 <= t0) return 0.0;
  // Integrate the step function by breakpoints.
  double v = 0.0;  // liters
  double t = t0;
  while (t < t1) {
    double t_next = t1;
    for (const auto& s : steps)
      if (s.t > t && s.t < t_next) t_next = s.t;
    v += flow_at(t, fallback) * (t_next - t);
    t = t_next;
  }
  return v / 1000.0;
}

double InjectionPlan::shut_in_after(double t0, double fallback) const {
  if (steps.empty()) return fallback > 0.0 ? kInf : t0;
  // Find the first step boundary after which planned flow stays zero.
  double cut = kInf;
  double current = flow_at(t0, fallback);
  if (current == 0.0) cut = t0;
  for (const auto& s : steps) {
    if (s.t <= t0) continue;
    if (s.flow_lps == 0.0) {
      if (cut == kInf) cut = s.t;
    } else {
      cut = kInf;
    }
  }
  return cut;
}

void TimeWindows::validate() const {
  if (learning_end <= 0.0) throw std::invalid_argument("learning_end must be > 0");
  if (ftw_length <= 0.0 || horizon <= 0.0 || recal_step <= 0.0)
    throw std::invalid_argument("window lengths must be > 0");
  const double ratio = horizon / ftw_length;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw std::invalid_argument("horizon must be an integer multiple of ftw_length");
}

VoxelGrid::VoxelGrid(double extent_m, double voxel_m)
    : extent_(extent_m), voxel_(voxel_m) {
  if (extent_m <= 0.0 || voxel_m <= 0.0)
    throw std::invalid_argument("grid extent and voxel size must be > 0");
  per_axis_ = static_cast<int>(std::round(extent_m / voxel_m));
  if (per_axis_ < 1 || std::abs(per_axis_ * voxel_m - extent_m) > 1e-6)
    throw std::invalid_argument("extent must be an integer multiple of voxel size");
  values.assign(static_cast<std::size_t>(n()), 0.0);
}

int VoxelGrid::axis_bin_clamped(double c) const {
  int k = static_cast<int>(std::floor((c + 0.5 * extent_) / voxel_));
  return std::clamp(k, 0, per_axis_ - 1);
}

std::optional<int> VoxelGrid::index_of(double x, double y, double z) const {
  const double h = 0.5 * extent_;
  if (x < -h || x >= h || y < -h || y >= h || z < -h || z >= h)
    return std::nullopt;
  return flat(axis_bin_clamped(x), axis_bin_clamped(y), axis_bin_clamped(z));
}

int VoxelGrid::index_clamped(double x, double y, double z,
                             bool* clamped) const {
  auto in = index_of(x, y, z);
  if (clamped) *clamped = !in.has_value();
  if (in) return *in;
  return flat(axis_bin_clamped(x), axis_bin_clamped(y), axis_bin_clamped(z));
}

double VoxelGrid::sum() const {
  // Compensated summation keeps the probability-normalization contract
  // independent of accumulation order.
  double s = 0.0, c = 0.0;
  for (double v : values) {
    const double y = v - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

void VoxelGrid::normalize() {
  const double s = sum();
  if (s <= 0.0) throw std::domain_error("cannot normalize a zero grid");
  for (auto& v : values) v /= s;
}

void VoxelGrid::fill(double v) {
  std::fill(values.begin(), values.end(), v);
}

int MagnitudePMF::bin_of(double m) const {
  // nudge keeps magnitudes reported exactly at a bin edge in that bin
  const int k =
      static_cast<int>(std::floor((m - m_min) / bin_width + 1e-9));
  return std::clamp(k, 0, static_cast<int>(probs.size()) - 1);
}

void MagnitudePMF::validate() const {
  if (probs.empty()) throw std::invalid_argument("empty magnitude PMF");
  double s = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("negative magnitude probability");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw std::invalid_argument("magnitude PMF does not sum to 1");
}

VoxelGrid Forecast::rate_grid() const {
  VoxelGrid g = spatial_pdf;
  for (auto& v : g.values) v *= expected_count;
  return g;
}

}  // namespace istb
