#include "istb/sass.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "istb/stats.hpp"

namespace istb {
namespace sass {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;

// Per-axis kernel factor: 0.5 * (erf((hi-c)/(s*sqrt2)) - erf((lo-c)/(s*sqrt2)))
double axis_mass(double c, double lo, double hi, double s) {
  return 0.5 * (std::erf((hi - c) * kInvSqrt2 / s) -
                std::erf((lo - c) * kInvSqrt2 / s));
}

// Cumulative injected volume with the planned extension past learning_end.
double q_c(const HydraulicSeries& hyd, const InjectionPlan& plan,
           double learning_end, double t) {
  if (t <= learning_end) return hyd.cumulative_volume_m3(t);
  const double fallback = hyd.flow_at(learning_end);
  return hyd.cumulative_volume_m3(learning_end) +
         plan.volume_m3(learning_end, t, fallback);
}

}  // namespace

double estimate_sigma_index(const SeismicCatalog& catalog,
                            const HydraulicSeries& hydraulics,
                            double learning_end, double mc, double b) {
  std::size_t n = 0;
  for (const auto& e : catalog.events)
    if (e.t <= learning_end && e.m >= mc) ++n;
  if (n == 0)
    throw std::runtime_error("estimate_sigma_index: insufficient seismicity");
  const double qc = hydraulics.cumulative_volume_m3(learning_end);
  if (qc <= 0.0)
    throw std::runtime_error("estimate_sigma_index: no injection yet");
  return std::log10(qc) - b * mc - std::log10(static_cast<double>(n));
}

double forecast_count_stimulation(const SassParams& params,
                                  const InjectionPlan& plan,
                                  const HydraulicSeries& hydraulics,
                                  double learning_end, double t1, double t2,
                                  double mc) {
  if (t1 < learning_end - 1e-9)
    throw std::invalid_argument(
        "forecast_count_stimulation: window starts before learning_end");
  if (t2 < t1) throw std::invalid_argument("forecast window reversed");
  const double scale = std::pow(10.0, -params.b * mc - params.sigma_index);
  const double n1 = q_c(hydraulics, plan, learning_end, t1) * scale;
  const double n2 = q_c(hydraulics, plan, learning_end, t2) * scale;
  return std::max(0.0, n2 - n1);
}

double fit_decay_p(const SeismicCatalog& catalog, double shut_in,
                   double learning_end, double ftw_length) {
  if (learning_end <= shut_in) return 2.0;  // generic fallback
  std::vector<double> log_t, log_r;
  for (double t = shut_in; t + ftw_length <= learning_end + 1e-9;
       t += ftw_length) {
    const std::size_t k = catalog.count_in(t, t + ftw_length);
    if (k == 0) continue;
    const double t_mid = t + 0.5 * ftw_length;
    log_t.push_back(std::log(t_mid / shut_in));
    log_r.push_back(std::log(static_cast<double>(k) / ftw_length));
  }
  if (log_t.size() < 2) return 2.0;
  // least squares slope of log-rate vs log(t/t0); p = -slope
  const std::size_t n = log_t.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += log_t[i];
    sy += log_r[i];
    sxx += log_t[i] * log_t[i];
    sxy += log_t[i] * log_r[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return 2.0;
  const double slope = (n * sxy - sx * sy) / denom;
  return std::max(-slope, 2.0);
}

double forecast_count_post(const SassParams& params, double t1, double t2) {
  if (params.t0 <= 0.0)
    throw std::invalid_argument("forecast_count_post: t0 must be > 0");
  if (t1 < params.t0 - 1e-9)
    throw std::invalid_argument("forecast_count_post: window before shut-in");
  if (t2 < t1) throw std::invalid_argument("forecast window reversed");
  const double p = params.p;
  // integral of r0a * (t/t0)^-p over [t1, t2]; p >= 2 so p != 1
  const double c = params.r0a * std::pow(params.t0, p) / (p - 1.0);
  return c * (std::pow(t1, 1.0 - p) - std::pow(t2, 1.0 - p));
}

double kernel_mass(const SeismicEvent& event, double x1, double x2, double y1,
                   double y2, double z1, double z2, double s1, double s2,
                   double s3) {
  if (x1 >= x2 || y1 >= y2 || z1 >= z2)
    throw std::domain_error("kernel_mass: inverted voxel bounds");
  if (s1 <= 0.0 || s2 <= 0.0 || s3 <= 0.0)
    throw std::domain_error("kernel_mass: bandwidths must be > 0");
  return axis_mass(event.x, x1, x2, s1) * axis_mass(event.y, y1, y2, s2) *
         axis_mass(event.z, z1, z2, s3);
}

SpatialPdfResult build_spatial_pdf(const SeismicCatalog& catalog,
                                   const VoxelGrid& grid,
                                   const SmoothingConfig& config, double now) {
  const int na = grid.per_axis();
  const int n = grid.n();
  SpatialPdfResult res{VoxelGrid(grid.extent(), grid.voxel())};
  const double eps = config.surprise;
  if (eps < 0.0 || eps > 1.0)
    throw std::invalid_argument("surprise factor outside [0, 1]");

  if (catalog.empty()) {
    res.pdf.fill(1.0 / n);
    res.empty_catalog = true;
    return res;
  }
  if (eps == 1.0) {
    res.pdf.fill(1.0 / n);
    return res;
  }

  std::vector<double> num(static_cast<std::size_t>(n), 0.0);
  double den = 0.0;
  double weight_total = 0.0;
  std::vector<double> kx(na), ky(na), kz(na);
  for (const auto& e : catalog.events) {
    const double w = std::exp(-(now - e.t) / config.tau_w);
    double mx = 0.0, my = 0.0, mz = 0.0;
    for (int i = 0; i < na; ++i) {
      kx[i] = axis_mass(e.x, grid.edge(i), grid.edge(i + 1), config.sigma1);
      ky[i] = axis_mass(e.y, grid.edge(i), grid.edge(i + 1), config.sigma2);
      kz[i] = axis_mass(e.z, grid.edge(i), grid.edge(i + 1), config.sigma3);
      mx += kx[i];
      my += ky[i];
      mz += kz[i];
    }
    const double in_grid = mx * my * mz;
    den += w * in_grid;
    weight_total += w;
    res.leaked_mass += w * (1.0 - in_grid);
    for (int ix = 0; ix < na; ++ix) {
      if (kx[ix] == 0.0) continue;
      const double wx = w * kx[ix];
      for (int iy = 0; iy < na; ++iy) {
        if (ky[iy] == 0.0) continue;
        const double wxy = wx * ky[iy];
        double* row = num.data() + static_cast<std::size_t>(grid.flat(ix, iy, 0));
        for (int iz = 0; iz < na; ++iz) row[iz] += wxy * kz[iz];
      }
    }
  }
  if (weight_total > 0.0) res.leaked_mass /= weight_total;
  if (den <= 0.0) {
    // All kernel mass leaked off the grid; only the surprise floor remains.
    res.pdf.fill(1.0 / n);
    return res;
  }
  const double floor = eps / n;
  for (int i = 0; i < n; ++i)
    res.pdf.values[i] = (1.0 - eps) * num[i] / den + floor;
  return res;
}

SmoothingSearchResult optimize_smoothing(
    const SeismicCatalog& learning, const VoxelGrid& grid, double learning_end,
    const TimeWindows& windows, int n_trials, std::uint64_t seed,
    const std::optional<SmoothingConfig>& previous) {
  SmoothingSearchResult out;
  out.config = previous.value_or(SmoothingConfig{});
  out.degenerate = true;
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  if (learning_end <= 0.0 || learning.empty()) return out;

  // Split rule: halves when the forecast period is at least half the
  // learning period, otherwise the validation set matches the forecast
  // length.
  double split;
  if (windows.horizon >= 0.5 * learning_end) split = 0.5 * learning_end;
  else split = learning_end - windows.horizon;

  SeismicCatalog training = learning.slice(0.0, split);
  SeismicCatalog validation = learning.slice(split, learning_end + 1e-9);
  if (training.empty() || validation.empty()) return out;

  // Observed voxel counts of the validation set (off-grid events clamp to
  // the nearest boundary voxel, as in the S-test accounting).
  std::map<int, long> counts;
  for (const auto& e : validation.events)
    ++counts[grid.index_clamped(e.x, e.y, e.z)];
  const double n_val = static_cast<double>(validation.size());

  // Distinct axis bins actually scored; the kernel is separable so the
  // LL needs the PDF only at occupied voxels.
  const int na = grid.per_axis();
  std::vector<char> need_x(na, 0), need_y(na, 0), need_z(na, 0);
  for (const auto& [idx, k] : counts) {
    need_x[idx / (na * na)] = 1;
    need_y[(idx / na) % na] = 1;
    need_z[idx % na] = 1;
  }

  double lnfact = 0.0;
  for (const auto& [idx, k] : counts) lnfact += std::lgamma(k + 1.0);

  Rng root(seed);
  double best_ll = -kInf;
  const int n = grid.n();
  std::vector<double> kx(na), ky(na), kz(na), num;
  for (int trial = 0; trial < n_trials; ++trial) {
    Rng rng = root.derive(static_cast<std::uint64_t>(trial));
    SmoothingConfig cfg;
    cfg.sigma1 = rng.log_uniform(25.0, 1000.0);
    cfg.sigma2 = rng.log_uniform(25.0, 1000.0);
    cfg.sigma3 = rng.log_uniform(25.0, 1000.0);
    cfg.surprise = rng.log_uniform(1e-3, 0.5);
    cfg.tau_w = rng.log_uniform(0.25 * windows.ftw_length, 4.0 * learning_end);

    num.assign(counts.size(), 0.0);
    double den = 0.0;
    for (const auto& e : training.events) {
      const double w = std::exp(-(split - e.t) / cfg.tau_w);
      double mx = 0.0, my = 0.0, mz = 0.0;
      for (int i = 0; i < na; ++i) {
        const double lo = grid.edge(i), hi = grid.edge(i + 1);
        double ax = axis_mass(e.x, lo, hi, cfg.sigma1);
        double ay = axis_mass(e.y, lo, hi, cfg.sigma2);
        double az = axis_mass(e.z, lo, hi, cfg.sigma3);
        mx += ax;
        my += ay;
        mz += az;
        kx[i] = need_x[i] ? ax : 0.0;
        ky[i] = need_y[i] ? ay : 0.0;
        kz[i] = need_z[i] ? az : 0.0;
      }
      den += w * mx * my * mz;
      std::size_t j = 0;
      for (const auto& [idx, k] : counts) {
        const int ix = idx / (na * na), iy = (idx / na) % na, iz = idx % na;
        num[j++] += w * kx[ix] * ky[iy] * kz[iz];
      }
    }
    if (den <= 0.0) continue;

    double ll = -n_val - lnfact;
    std::size_t j = 0;
    bool ok = true;
    for (const auto& [idx, k] : counts) {
      const double pdf = (1.0 - cfg.surprise) * num[j++] / den +
                         cfg.surprise / n;
      if (pdf <= 0.0) {
        ok = false;
        break;
      }
      ll += static_cast<double>(k) * std::log(n_val * pdf);
    }
    if (!ok) continue;
    if (ll > best_ll) {
      best_ll = ll;
      out.config = cfg;
      out.degenerate = false;
      out.validation_ll = ll;
    }
  }
  return out;
}

SassForecastResult sass_forecast(const SeismicCatalog& learning_catalog,
                                 const HydraulicSeries& learning_hydraulics,
                                 const InjectionPlan& plan,
                                 const TimeWindows& windows,
                                 const VoxelGrid& grid, double mc,
                                 std::uint64_t seed,
                                 const SassForecastOptions& opts) {
  windows.validate();
  const double L = windows.learning_end;

  // Clamped magnitudes carry no GR information, so they are excluded
  // from the b-value fit (their count still feeds the rate law).
  std::vector<double> mags;
  for (const auto& e : learning_catalog.events) {
    if (e.t > L || e.m < mc) continue;
    if (opts.truncated_top && e.m >= *opts.truncated_top - 1e-9) continue;
    mags.push_back(e.m);
  }
  const double b = estimate_b_value(mags, mc);

  SassParams params;
  params.b = b;
  params.sigma_index =
      estimate_sigma_index(learning_catalog, learning_hydraulics, L, mc, b);

  // Shut-in: observed if it already happened, otherwise from the plan.
  double shut_in = learning_hydraulics.shut_in_time;
  if (!(shut_in <= L)) {
    shut_in = plan.shut_in_after(L, learning_hydraulics.flow_at(L));
  }
  params.t0 = shut_in;

  const double stim_end = std::min(L, shut_in);
  if (stim_end > 0.0) {
    std::size_t n_stim = 0;
    for (const auto& e : learning_catalog.events)
      if (e.t < stim_end && e.m >= mc) ++n_stim;
    params.r0a = static_cast<double>(n_stim) / stim_end;
  }
  params.p = fit_decay_p(learning_catalog, shut_in, L, windows.ftw_length);

  SmoothingConfig smoothing;
  if (opts.fixed_smoothing) {
    smoothing = *opts.fixed_smoothing;
  } else {
    smoothing = optimize_smoothing(learning_catalog.up_to(L), grid, L, windows,
                                   opts.n_trials, seed,
                                   opts.previous_smoothing)
                    .config;
  }

  const auto spatial = build_spatial_pdf(learning_catalog.up_to(L), grid,
                                         smoothing, L);
  const auto mag_pmf = gr_magnitude_pmf(b, mc, opts.n_mag_bins, 0.1,
                                        opts.truncated_top.has_value());

  SassForecastResult res;
  res.params = params;
  res.smoothing = smoothing;
  for (int k = 0; k < windows.n_ftw(); ++k) {
    const double t1 = L + k * windows.ftw_length;
    const double t2 = t1 + windows.ftw_length;
    double count = 0.0;
    if (t2 <= shut_in) {
      count = forecast_count_stimulation(params, plan, learning_hydraulics, L,
                                         t1, t2, mc);
    } else if (t1 >= shut_in) {
      count = forecast_count_post(params, t1, t2);
    } else {
      count = forecast_count_stimulation(params, plan, learning_hydraulics, L,
                                         t1, shut_in, mc) +
              forecast_count_post(params, shut_in, t2);
    }
    Forecast f;
    f.expected_count = count;
    f.magnitudes = mag_pmf;
    f.spatial_pdf = spatial.pdf;
    f.model_id = "sass";
    f.learning_end = L;
    f.t_start = t1;
    f.t_end = t2;
    res.ftws.push_back(std::move(f));
  }
  return res;
}

}  // namespace sass
}  // namespace istb
