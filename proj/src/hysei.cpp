#include "istb/hysei.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "istb/optim.hpp"
#include "istb/stats.hpp"

namespace istb {
namespace hysei {

namespace {

// Smoothed Heaviside H_s(x) = (1 + tanh(x)) / 2 on a pre-scaled argument.
double smooth_step(double x) {
  if (x > 20.0) return 1.0;
  if (x < -20.0) return 0.0;
  return 0.5 * (1.0 + std::tanh(x));
}

}  // namespace

RadialDiffusionSolver::RadialDiffusionSolver(const HydraulicParams& params,
                                             const MeshSpec& mesh,
                                             bool stimulate)
    : params_(params), mesh_(mesh), stimulate_(stimulate) {
  if (mesh.n_nodes < 2 || mesh.radius <= mesh.r_well || mesh.dt <= 0.0)
    throw std::invalid_argument("invalid radial mesh");
  if (params.rho <= 0 || params.S <= 0 || params.kappa0 <= 0 || params.mu <= 0)
    throw std::invalid_argument("hydraulic parameters must be positive");
  if (stimulate && params.C_u * mesh.dt > params.u_t)
    throw std::runtime_error(
        "stimulation update unstable: C_u * dt exceeds u_t; refine dt or "
        "reduce C_u");

  const int n = mesh.n_nodes;
  r_.resize(n);
  const double lg0 = std::log(mesh.r_well), lg1 = std::log(mesh.radius);
  for (int i = 0; i < n; ++i)
    r_[i] = std::exp(lg0 + (lg1 - lg0) * i / (n - 1));
  face_r_.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) face_r_[i] = std::sqrt(r_[i] * r_[i + 1]);
  area_.resize(n);
  area_[0] = M_PI * (face_r_[0] * face_r_[0] - r_[0] * r_[0]);
  for (int i = 1; i + 1 < n; ++i)
    area_[i] = M_PI * (face_r_[i] * face_r_[i] - face_r_[i - 1] * face_r_[i - 1]);
  area_[n - 1] =
      M_PI * (mesh.radius * mesh.radius - face_r_[n - 2] * face_r_[n - 2]);

  p_.assign(n, 0.0);  // gauge pressure relative to ambient
  u_.assign(n, 0.0);
  diag_.resize(n);
  lower_.resize(n);
  upper_.resize(n);
  rhs_.resize(n);
}

void RadialDiffusionSolver::step(double flow_lps) {
  const int n = mesh_.n_nodes;
  const double dt = mesh_.dt;
  const double rho = params_.rho;
  const double mobility_scale = rho / params_.mu;

  // Two-point radial transmissibilities with kappa lagged one step.
  // T = 2*pi*(rho/mu) / (ln(rf/ri)/kappa_i + ln(rj/rf)/kappa_j) is exact
  // for the steady log profile, so the log-spaced mesh converges fast.
  auto kappa = [&](int i) {
    return stimulate_ ? params_.kappa0 * (u_[i] + 1.0) : params_.kappa0;
  };
  const double q_kgps = rho * flow_lps / 1000.0;

  for (int i = 0; i < n; ++i) {
    const double storage = rho * params_.S * area_[i] / dt;
    diag_[i] = storage;
    rhs_[i] = storage * p_[i];
    lower_[i] = 0.0;
    upper_[i] = 0.0;
  }
  rhs_[0] += q_kgps;
  for (int i = 0; i + 1 < n; ++i) {
    const double t_face =
        2.0 * M_PI * mobility_scale /
        (std::log(face_r_[i] / r_[i]) / kappa(i) +
         std::log(r_[i + 1] / face_r_[i]) / kappa(i + 1));
    diag_[i] += t_face;
    diag_[i + 1] += t_face;
    upper_[i] = -t_face;
    lower_[i + 1] = -t_face;
  }

  // Thomas algorithm.
  for (int i = 1; i < n; ++i) {
    const double w = lower_[i] / diag_[i - 1];
    diag_[i] -= w * upper_[i - 1];
    rhs_[i] -= w * rhs_[i - 1];
  }
  std::vector<double>& p_new = rhs_;  // solve in place
  p_new[n - 1] /= diag_[n - 1];
  for (int i = n - 2; i >= 0; --i)
    p_new[i] = (p_new[i] - upper_[i] * p_new[i + 1]) / diag_[i];

  if (stimulate_) {
    const double w_p = params_.h_width;
    const double w_rate = params_.h_width / 600.0;  // Pa/s
    const double w_u = 0.01 * params_.u_t;
    for (int i = 0; i < n; ++i) {
      const double dpdt = (p_new[i] - p_[i]) / dt;
      const double gate = smooth_step(dpdt / w_rate) *
                          smooth_step((params_.u_t - u_[i]) / w_u) *
                          smooth_step((p_new[i] - params_.p_t) / w_p);
      u_[i] = std::min(u_[i] + dt * params_.C_u * gate, params_.u_t);
    }
  }
  p_ = p_new;
  injected_mass_ += q_kgps * dt;
  t_ += dt;
  if (!std::isfinite(p_[0]))
    throw std::runtime_error("diffusion solver failure: non-finite pressure");
}

double RadialDiffusionSolver::stored_mass() const {
  double m = 0.0;
  for (int i = 0; i < mesh_.n_nodes; ++i)
    m += params_.rho * params_.S * p_[i] * area_[i];
  return m;
}

SolverOutput solve_diffusion(
    const HydraulicParams& params, const MeshSpec& mesh,
    const std::function<double(double)>& flow_lps, double t_end,
    bool stimulate,
    const std::function<void(const RadialDiffusionSolver&)>& step_cb) {
  RadialDiffusionSolver solver(params, mesh, stimulate);
  SolverOutput out;
  while (solver.time() + 0.5 * mesh.dt < t_end) {
    const double q = flow_lps(solver.time());
    if (q < 0.0) throw std::invalid_argument("negative injection rate");
    solver.step(q);
    out.times.push_back(solver.time());
    out.well_mpa.push_back(solver.well_pressure_mpa());
    for (double p : solver.pressure())
      out.max_pressure = std::max(out.max_pressure, p);
    if (step_cb) step_cb(solver);
  }
  out.final_p = solver.pressure();
  out.final_u = solver.stim_factor();
  out.injected_mass = solver.injected_mass();
  out.stored_mass = solver.stored_mass();
  return out;
}

namespace {

// RMSE between a modeled well-pressure trace and observed wellhead
// pressure, with the static head offset solved analytically.
double offset_rmse(const std::vector<double>& times,
                   const std::vector<double>& model_mpa,
                   const HydraulicSeries& observed, double t_shift,
                   double* best_offset = nullptr) {
  double sum_d = 0.0;
  const std::size_t n = times.size();
  if (n == 0) return kInf;
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = observed.pressure_at(times[i] + t_shift) - model_mpa[i];
    sum_d += diff[i];
  }
  const double offset = sum_d / static_cast<double>(n);
  double ss = 0.0;
  for (double d : diff) ss += (d - offset) * (d - offset);
  if (best_offset) *best_offset = offset;
  return std::sqrt(ss / static_cast<double>(n));
}

}  // namespace

InversionResult invert_hydraulics(const HydraulicSeries& observed,
                                  const HydraulicSeries& pre_stim,
                                  const HydraulicParams& base,
                                  const InversionBounds& bounds,
                                  const MeshSpec& mesh, std::uint64_t seed,
                                  int max_evals, int restarts,
                                  const HydraulicParams* warm_start) {
  if (observed.samples.size() < 2)
    throw std::invalid_argument("invert_hydraulics: observed series too short");
  InversionResult res;
  res.params = warm_start ? *warm_start : base;
  Rng rng(seed ^ 0x68797365ULL);

  // Stage 1: kappa0 and S from the pre-stimulation test (constant kappa).
  if (pre_stim.samples.size() >= 2) {
    const double t0 = pre_stim.samples.front().t;
    const double span = pre_stim.last_time() - t0;
    auto objective = [&](const std::vector<double>& x) {
      HydraulicParams p = res.params;
      p.kappa0 = std::pow(10.0, x[0]);
      p.S = std::pow(10.0, x[1]);
      try {
        auto run = solve_diffusion(
            p, mesh, [&](double t) { return pre_stim.flow_at(t0 + t); }, span,
            false);
        return offset_rmse(run.times, run.well_mpa, pre_stim, t0);
      } catch (const std::exception&) {
        return kInf;
      }
    };
    const std::vector<double> lo{std::log10(bounds.kappa0_lo),
                                 std::log10(bounds.S_lo)};
    const std::vector<double> hi{std::log10(bounds.kappa0_hi),
                                 std::log10(bounds.S_hi)};
    std::vector<double> best_x{std::log10(res.params.kappa0),
                               std::log10(res.params.S)};
    double best_f = kInf;
    for (int r = 0; r < std::max(restarts, 1); ++r) {
      std::vector<double> x0(2);
      if (r == 0) {
        x0 = {std::log10(res.params.kappa0), std::log10(res.params.S)};
      } else {
        x0 = {rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1])};
      }
      auto nm = nelder_mead(objective, x0, {0.5, 0.5}, lo, hi, max_evals);
      if (nm.f < best_f) {
        best_f = nm.f;
        best_x = nm.x;
      }
    }
    res.params.kappa0 = std::pow(10.0, best_x[0]);
    res.params.S = std::pow(10.0, best_x[1]);
    res.pre_stim_rmse_mpa = best_f;
  }

  // Stage 2: stimulation parameters against the observed wellhead pressure.
  const double t0 = observed.samples.front().t;
  const double span = observed.last_time() - t0;
  double stage2_offset = 0.0;
  auto objective = [&](const std::vector<double>& x) {
    HydraulicParams p = res.params;
    p.C_u = std::pow(10.0, x[0]);
    p.u_t = std::pow(10.0, x[1]);
    p.p_t = std::pow(10.0, x[2]);
    try {
      auto run = solve_diffusion(
          p, mesh, [&](double t) { return observed.flow_at(t0 + t); }, span,
          true);
      return offset_rmse(run.times, run.well_mpa, observed, t0);
    } catch (const std::exception&) {
      return kInf;
    }
  };
  const std::vector<double> lo{std::log10(bounds.C_u_lo),
                               std::log10(bounds.u_t_lo),
                               std::log10(bounds.p_t_lo)};
  const std::vector<double> hi{std::log10(bounds.C_u_hi),
                               std::log10(bounds.u_t_hi),
                               std::log10(bounds.p_t_hi)};
  std::vector<double> best_x{std::log10(res.params.C_u),
                             std::log10(res.params.u_t),
                             std::log10(res.params.p_t)};
  double best_f = kInf;
  bool converged = false;
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    std::vector<double> x0(3);
    if (r == 0) {
      x0 = best_x;
    } else {
      for (int d = 0; d < 3; ++d) x0[d] = rng.uniform(lo[d], hi[d]);
    }
    auto nm = nelder_mead(objective, x0, {0.3, 0.3, 0.3}, lo, hi, max_evals);
    if (nm.f < best_f) {
      best_f = nm.f;
      best_x = nm.x;
      converged = nm.converged;
    }
  }
  res.params.C_u = std::pow(10.0, best_x[0]);
  res.params.u_t = std::pow(10.0, best_x[1]);
  res.params.p_t = std::pow(10.0, best_x[2]);
  // Recover the offset of the winning parameters.
  {
    auto run = solve_diffusion(
        res.params, mesh, [&](double t) { return observed.flow_at(t0 + t); },
        span, true);
    res.rmse_mpa = offset_rmse(run.times, run.well_mpa, observed, t0,
                               &stage2_offset);
  }
  res.params.static_offset_mpa += stage2_offset;
  res.converged = converged && std::isfinite(best_f);
  return res;
}

std::vector<Seed> place_seeds(const SeedModelParams& params, double radius,
                              double threshold_max, Rng& rng) {
  if (params.n_seeds <= 0)
    throw std::invalid_argument("place_seeds: n_seeds must be > 0");
  std::vector<Seed> seeds(params.n_seeds);
  const double thr_hi = std::max(threshold_max, params.d_mu);
  for (auto& s : seeds) {
    s.r = radius * std::sqrt(rng.uniform());  // uniform in area
    s.theta = 2.0 * M_PI * rng.uniform();
    s.diff_stress = rng.uniform(params.sigma_d_min, params.sigma_d_max);
    // Failure threshold at least d_mu above the ambient (zero-gauge) state.
    s.threshold = params.d_mu + rng.uniform() * (thr_hi - params.d_mu);
    if (!std::isfinite(params.d_mu)) s.threshold = params.d_mu;
  }
  return seeds;
}

double local_b_value(double diff_stress, const SeedModelParams& params) {
  const double lo = params.sigma_d_min, hi = params.sigma_d_max;
  if (hi <= lo) return 0.5 * (params.b_max + params.b_min);
  const double f = std::clamp((diff_stress - lo) / (hi - lo), 0.0, 1.0);
  return params.b_max + f * (params.b_min - params.b_max);
}

SeedSimulator::SeedSimulator(const std::vector<Seed>& seeds,
                             const std::vector<double>& radii, double d_tau)
    : heaps_(radii.size()), d_tau_(d_tau) {
  auto cmp = [](const Entry& a, const Entry& b) {
    return a.threshold > b.threshold ||
           (a.threshold == b.threshold && a.seed > b.seed);
  };
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    // nearest node by radius
    auto it = std::lower_bound(radii.begin(), radii.end(), seeds[i].r);
    std::size_t node = it - radii.begin();
    if (node == radii.size()) node = radii.size() - 1;
    if (node > 0 && radii[node] - seeds[i].r > seeds[i].r - radii[node - 1])
      --node;
    heaps_[node].push_back({seeds[i].threshold, static_cast<std::uint32_t>(i)});
  }
  for (auto& h : heaps_) std::make_heap(h.begin(), h.end(), cmp);
}

void SeedSimulator::on_pressure(int node, double t, double p,
                                const TriggerCb& cb) {
  auto cmp = [](const Entry& a, const Entry& b) {
    return a.threshold > b.threshold ||
           (a.threshold == b.threshold && a.seed > b.seed);
  };
  auto& h = heaps_[node];
  std::vector<Entry> reload;
  while (!h.empty() && h.front().threshold <= p) {
    std::pop_heap(h.begin(), h.end(), cmp);
    Entry e = h.back();
    h.pop_back();
    cb(e.seed, t);
    if (d_tau_ > 0.0) reload.push_back({e.threshold + d_tau_, e.seed});
  }
  // Reloaded thresholds re-arm only for later pressure updates, so a seed
  // fires at most once per update.
  for (const auto& e : reload) {
    h.push_back(e);
    std::push_heap(h.begin(), h.end(), cmp);
  }
}

std::vector<Synthetic2DEvent> simulate_seismicity(const PressureHistory& history,
                                                  const std::vector<Seed>& seeds,
                                                  const SeedModelParams& params,
                                                  double m_min, Rng& rng) {
  if (history.p.size() != history.times.size())
    throw std::invalid_argument("simulate_seismicity: ragged pressure history");
  SeedSimulator sim(seeds, history.radii, params.d_tau);
  std::vector<double> run_max(history.radii.size(), 0.0);
  std::vector<Synthetic2DEvent> out;
  const long base_copies = static_cast<long>(std::floor(params.F_s));
  const double frac = params.F_s - static_cast<double>(base_copies);
  auto emit = [&](std::size_t seed_idx, double t) {
    const Seed& s = seeds[seed_idx];
    const double b = local_b_value(s.diff_stress, params);
    long copies = base_copies + (rng.uniform() < frac ? 1 : 0);
    for (long c = 0; c < copies; ++c) {
      Synthetic2DEvent e;
      e.t = t;
      e.r = s.r;
      e.theta = s.theta;
      e.m = sample_gr_magnitude(b, m_min, rng.uniform());
      out.push_back(e);
    }
  };
  for (std::size_t step = 0; step < history.times.size(); ++step) {
    const auto& p = history.p[step];
    for (std::size_t node = 0; node < p.size(); ++node) {
      if (p[node] > run_max[node]) {
        run_max[node] = p[node];
        sim.on_pressure(static_cast<int>(node), history.times[step], p[node],
                        emit);
      }
    }
  }
  return out;
}

ExtendTo3dResult extend_to_3d(const std::vector<Synthetic2DEvent>& synthetic,
                              const SeismicCatalog& observed, Rng& rng,
                              double jitter_halfwidth) {
  ExtendTo3dResult res;
  res.catalog.mc = observed.mc;
  const std::size_t n_obs = observed.size();

  Eigen::Vector3d ax_major(1, 0, 0), ax_mid(0, 1, 0), ax_min(0, 0, 1);
  std::vector<double> off_plane;  // observed projections onto the minimum axis

  if (n_obs >= 3) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& e : observed.events) mean += Eigen::Vector3d(e.x, e.y, e.z);
    mean /= static_cast<double>(n_obs);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& e : observed.events) {
      Eigen::Vector3d d = Eigen::Vector3d(e.x, e.y, e.z) - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(n_obs);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    // eigenvalues ascending: 0 = minimum (off-plane) axis
    ax_min = es.eigenvectors().col(0);
    ax_mid = es.eigenvectors().col(1);
    ax_major = es.eigenvectors().col(2);

    if (es.eigenvalues()(1) <= 1e-9 * std::max(es.eigenvalues()(2), 1e-300))
      res.degenerate = true;  // collinear cloud

    // Rotation-equivariant sign convention: orient each axis so the
    // largest-magnitude observed projection is positive.
    auto orient = [&](Eigen::Vector3d& ax) {
      double best = 0.0;
      for (const auto& e : observed.events) {
        const double pr = ax.dot(Eigen::Vector3d(e.x, e.y, e.z) - mean);
        if (std::abs(pr) > std::abs(best)) best = pr;
      }
      if (best < 0.0) ax = -ax;
    };
    orient(ax_major);
    orient(ax_mid);
    orient(ax_min);

    for (const auto& e : observed.events)
      off_plane.push_back(ax_min.dot(Eigen::Vector3d(e.x, e.y, e.z)));
  } else {
    res.isotropic_fallback = true;
  }

  for (const auto& s : synthetic) {
    const double in1 = s.r * std::cos(s.theta);
    const double in2 = s.r * std::sin(s.theta);
    double off = 0.0;
    if (res.isotropic_fallback) {
      // no observed anisotropy to copy; leave the event in a random plane
      off = 0.0;
    } else if (res.degenerate) {
      off = 0.0;
    } else {
      off = off_plane[rng.below(off_plane.size())] +
            rng.uniform(-jitter_halfwidth, jitter_halfwidth);
    }
    const Eigen::Vector3d pos = ax_major * in1 + ax_mid * in2 + ax_min * off;
    SeismicEvent e;
    e.t = s.t;
    e.x = pos(0);
    e.y = pos(1);
    e.z = pos(2);
    e.m = s.m;
    res.catalog.events.push_back(e);
  }
  return res;
}

HyseiForecastResult hysei_forecast(const SeismicCatalog& learning_catalog,
                                   const HydraulicSeries& learning_hydraulics,
                                   const HydraulicSeries& pre_stim,
                                   const InjectionPlan& plan,
                                   const TimeWindows& windows,
                                   const VoxelGrid& grid, double mc,
                                   const SeedModelParams& seed_params,
                                   std::uint64_t seed,
                                   const HyseiOptions& opts) {
  windows.validate();
  const double L = windows.learning_end;
  const double t_final = L + windows.horizon;
  Rng root(seed);

  HyseiForecastResult res;
  {
    auto inv = invert_hydraulics(learning_hydraulics.up_to(L), pre_stim,
                                 HydraulicParams{}, opts.bounds, opts.mesh,
                                 root.derive(1).next(), opts.inversion_max_evals,
                                 opts.inversion_restarts, opts.warm_start);
    res.params = inv.params;
    res.inversion_rmse_mpa = inv.rmse_mpa;
  }

  // Seed failure thresholds span up to a proxy for the peak reservoir
  // pressure; the observed wellhead pressure bounds it from above.
  double thr_max = seed_params.threshold_max;
  if (thr_max <= seed_params.d_mu) {
    double whp_max = 0.0;
    for (const auto& s : learning_hydraulics.samples)
      if (s.t <= L) whp_max = std::max(whp_max, s.whp_mpa);
    thr_max = std::max(1.2 * whp_max * 1e6, seed_params.d_mu + 1e6);
  }

  const int n_real = std::max(opts.n_realizations, 1);
  std::vector<Seed> all_seeds;
  all_seeds.reserve(static_cast<std::size_t>(n_real) * seed_params.n_seeds);
  for (int k = 0; k < n_real; ++k) {
    Rng r = root.derive(100 + static_cast<std::uint64_t>(k));
    auto seeds = place_seeds(seed_params, opts.mesh.radius, thr_max, r);
    all_seeds.insert(all_seeds.end(), seeds.begin(), seeds.end());
  }

  RadialDiffusionSolver solver(res.params, opts.mesh, true);
  SeedSimulator sim(all_seeds, solver.radii(), seed_params.d_tau);

  const double fallback_flow = learning_hydraulics.flow_at(L);
  auto flow = [&](double t) {
    return t <= L ? learning_hydraulics.flow_at(t)
                  : plan.flow_at(t, fallback_flow);
  };

  Rng event_rng = root.derive(2);
  std::vector<long> learn_counts(n_real, 0);
  struct TaggedEvent {
    Synthetic2DEvent e;
    int realization;
  };
  std::vector<TaggedEvent> forecast_events;
  const std::size_t per_real = static_cast<std::size_t>(seed_params.n_seeds);

  auto emit = [&](std::size_t idx, double t) {
    const int realization = static_cast<int>(idx / per_real);
    if (t <= L) {
      ++learn_counts[realization];
      return;
    }
    const Seed& s = all_seeds[idx];
    const double b = local_b_value(s.diff_stress, seed_params);
    TaggedEvent te;
    te.e = {t, s.r, s.theta,
            sample_gr_magnitude(b, mc, event_rng.uniform())};
    te.realization = realization;
    forecast_events.push_back(te);
  };

  std::vector<double> run_max(solver.radii().size(), 0.0);
  while (solver.time() + 0.5 * opts.mesh.dt < t_final) {
    solver.step(flow(solver.time()));
    const auto& p = solver.pressure();
    for (std::size_t node = 0; node < p.size(); ++node) {
      if (p[node] > run_max[node]) {
        run_max[node] = p[node];
        sim.on_pressure(static_cast<int>(node), solver.time(), p[node], emit);
      }
    }
  }

  // F_s: observed-over-synthetic count ratio on the learning period,
  // refit every recalibration.
  long n_obs = 0;
  for (const auto& e : learning_catalog.events)
    if (e.t <= L && e.m >= mc) ++n_obs;
  double mean_raw = 0.0;
  for (long c : learn_counts) mean_raw += static_cast<double>(c);
  mean_raw /= static_cast<double>(n_real);
  res.f_s = mean_raw > 0.0 ? static_cast<double>(n_obs) / mean_raw : 1.0;

  // 3D placement of all forecast events against the observed cloud.
  std::vector<Synthetic2DEvent> flat;
  flat.reserve(forecast_events.size());
  for (const auto& te : forecast_events) flat.push_back(te.e);
  Rng ext_rng = root.derive(3);
  auto ext = extend_to_3d(flat, learning_catalog.up_to(L), ext_rng,
                          0.5 * grid.voxel());

  // Magnitude PMF from the pooled synthetic magnitudes of the horizon.
  MagnitudePMF mag_pmf;
  mag_pmf.m_min = mc;
  mag_pmf.bin_width = 0.1;
  mag_pmf.truncated_top = opts.truncated_top.has_value();
  mag_pmf.probs.assign(opts.n_mag_bins, 0.0);
  if (!flat.empty()) {
    for (const auto& e : flat) {
      double m = e.m;
      if (opts.truncated_top && m > *opts.truncated_top)
        m = *opts.truncated_top;
      mag_pmf.probs[mag_pmf.bin_of(m)] += 1.0;
    }
    double s = 0.0;
    for (double v : mag_pmf.probs) s += v;
    for (auto& v : mag_pmf.probs) v /= s;
  } else {
    // no synthetic events at all; fall back to GR on the learning catalog
    try {
      mag_pmf = gr_magnitude_pmf(estimate_b_value(learning_catalog, mc), mc,
                                 opts.n_mag_bins, 0.1,
                                 opts.truncated_top.has_value());
    } catch (const std::exception&) {
      mag_pmf.probs.assign(opts.n_mag_bins, 1.0 / opts.n_mag_bins);
    }
  }

  const int n_ftw = windows.n_ftw();
  const int n_vox = grid.n();
  for (int k = 0; k < n_ftw; ++k) {
    const double t1 = L + k * windows.ftw_length;
    const double t2 = t1 + windows.ftw_length;
    long count = 0;
    VoxelGrid pdf(grid.extent(), grid.voxel());
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const auto& e = ext.catalog.events[i];
      if (e.t < t1 || e.t >= t2) continue;
      ++count;
      ++pdf.values[pdf.index_clamped(e.x, e.y, e.z)];
    }
    if (count == 0) {
      pdf.fill(1.0 / n_vox);
    } else {
      pdf.normalize();
      const double floor = opts.surprise / n_vox;
      for (auto& v : pdf.values) v = std::max(v, floor);
      pdf.normalize();
    }
    Forecast f;
    f.expected_count =
        res.f_s * static_cast<double>(count) / static_cast<double>(n_real);
    f.magnitudes = mag_pmf;
    f.spatial_pdf = std::move(pdf);
    f.model_id = "hysei";
    f.learning_end = L;
    f.t_start = t1;
    f.t_end = t2;
    res.ftws.push_back(std::move(f));
  }
  return res;
}

}  // namespace hysei
}  // namespace istb
