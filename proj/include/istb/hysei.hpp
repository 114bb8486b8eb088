#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "istb/rng.hpp"
#include "istb/types.hpp"

namespace istb {
namespace hysei {

struct HydraulicParams {
  double rho = 1000.0;      // fluid density, kg/m^3
  double S = 1e-8;          // specific storage coefficient, 1/Pa
  double kappa0 = 2e-12;    // initial permeability, m^2 (unit-thickness layer)
  double mu = 1e-3;         // fluid viscosity, Pa s
  double C_u = 1e-3;        // stimulation velocity, 1/s
  double u_t = 20.0;        // maximum stimulation factor
  double p_t = 5e6;         // threshold pressure, Pa
  double h_width = 1e5;     // Heaviside smoothing width, Pa
  double static_offset_mpa = 0.0;  // wellhead vs. modeled well-node offset
};

struct MeshSpec {
  double radius = 1200.0;  // m
  int n_nodes = 3000;
  double dt = 60.0;        // s
  double r_well = 0.1;     // borehole radius, m (innermost node)
};

// 1-D radial nonlinear diffusion with irreversible permeability
// enhancement. Log-spaced nodes with exact radial two-point
// transmissibilities; backward-Euler pressure step with kappa lagged one
// step; explicit update of the stimulation factor u. Closed (zero-flux)
// outer boundary.
class RadialDiffusionSolver {
 public:
  RadialDiffusionSolver(const HydraulicParams& params, const MeshSpec& mesh,
                        bool stimulate);

  // Advance one dt with the given injection rate (L/s).
  void step(double flow_lps);

  double time() const { return t_; }
  const std::vector<double>& pressure() const { return p_; }       // Pa
  const std::vector<double>& stim_factor() const { return u_; }
  const std::vector<double>& radii() const { return r_; }
  const std::vector<double>& cell_areas() const { return area_; }  // m^2
  double well_pressure_mpa() const {
    return p_[0] / 1e6 + params_.static_offset_mpa;
  }
  double injected_mass() const { return injected_mass_; }  // kg
  double stored_mass() const;                              // kg
  bool stimulate() const { return stimulate_; }

 private:
  HydraulicParams params_;
  MeshSpec mesh_;
  bool stimulate_;
  double t_ = 0.0;
  std::vector<double> r_, face_r_, area_;
  std::vector<double> p_, u_;
  std::vector<double> diag_, lower_, upper_, rhs_;  // tridiagonal scratch
  double injected_mass_ = 0.0;
};

struct SolverOutput {
  std::vector<double> times;
  std::vector<double> well_mpa;        // modeled wellhead pressure
  std::vector<double> final_p;         // Pa
  std::vector<double> final_u;
  double injected_mass = 0.0;
  double stored_mass = 0.0;
  double max_pressure = 0.0;           // over all nodes and steps, Pa
};

// Runs the solver over [0, t_end] against a flow schedule (L/s as a
// function of time). step_cb, when set, is invoked after every step.
SolverOutput solve_diffusion(
    const HydraulicParams& params, const MeshSpec& mesh,
    const std::function<double(double)>& flow_lps, double t_end,
    bool stimulate,
    const std::function<void(const RadialDiffusionSolver&)>& step_cb = nullptr);

struct InversionBounds {
  double kappa0_lo = 1e-14, kappa0_hi = 1e-10;
  double S_lo = 1e-10, S_hi = 1e-6;
  double C_u_lo = 1e-6, C_u_hi = 1e-1;
  double u_t_lo = 1.0, u_t_hi = 200.0;
  double p_t_lo = 1e5, p_t_hi = 5e7;
};

struct InversionResult {
  HydraulicParams params;
  double rmse_mpa = 0.0;           // stimulation-phase misfit
  double pre_stim_rmse_mpa = 0.0;
  bool converged = true;
};

// Two-stage hydraulic inversion: kappa0 and S from the pre-stimulation
// test with constant-kappa runs, then (C_u, u_t, p_t) by Nelder-Mead with
// random restarts against the stimulation wellhead pressure. The static
// head offset is solved analytically at every evaluation.
InversionResult invert_hydraulics(const HydraulicSeries& observed,
                                  const HydraulicSeries& pre_stim,
                                  const HydraulicParams& base,
                                  const InversionBounds& bounds,
                                  const MeshSpec& mesh, std::uint64_t seed,
                                  int max_evals = 300, int restarts = 3,
                                  const HydraulicParams* warm_start = nullptr);

struct SeedModelParams {
  int n_seeds = 100000;
  double F_s = 1.0;          // synthetic-to-observed count multiplier
  double d_tau = 2e5;        // stress drop: threshold reload after trigger, Pa
  double d_mu = 2e5;         // criticality offset above ambient state, Pa
  double b_max = 1.5;        // b at minimum differential stress
  double b_min = 0.7;        // b at maximum differential stress
  double sigma_d_min = 1e6;  // differential stress range, Pa
  double sigma_d_max = 1e8;
  double threshold_max = 0.0;  // Pa; <= d_mu means "supply at placement"
};

struct Seed {
  double r = 0.0;
  double theta = 0.0;
  double threshold = 0.0;    // critical pore pressure, Pa
  double diff_stress = 0.0;  // Pa
};

// Uniform-in-area placement over the disc; thresholds uniform on
// [d_mu, threshold_max].
std::vector<Seed> place_seeds(const SeedModelParams& params, double radius,
                              double threshold_max, Rng& rng);

// Linear b(sigma_d): b_max at sigma_d_min, b_min at sigma_d_max,
// clamped outside the range.
double local_b_value(double diff_stress, const SeedModelParams& params);

struct Synthetic2DEvent {
  double t = 0.0;
  double r = 0.0, theta = 0.0;
  double m = 0.0;
};

// Dense pressure history (tests and bindings; production runs stream
// through the solver instead).
struct PressureHistory {
  std::vector<double> times;
  std::vector<double> radii;
  std::vector<std::vector<double>> p;  // p[step][node], Pa
};

// Streaming trigger engine: seeds fire when the pore pressure at their
// radius first exceeds their threshold; the threshold then reloads by
// d_tau (seeds with d_tau == 0 retire after one trigger).
class SeedSimulator {
 public:
  using TriggerCb = std::function<void(std::size_t seed_idx, double t)>;

  SeedSimulator(const std::vector<Seed>& seeds, const std::vector<double>& radii,
                double d_tau);

  // Call when node pressure reaches a new running maximum.
  void on_pressure(int node, double t, double p, const TriggerCb& cb);

 private:
  struct Entry {
    double threshold;
    std::uint32_t seed;
  };
  std::vector<std::vector<Entry>> heaps_;  // min-heap per node
  double d_tau_;
};

std::vector<Synthetic2DEvent> simulate_seismicity(const PressureHistory& history,
                                                  const std::vector<Seed>& seeds,
                                                  const SeedModelParams& params,
                                                  double m_min, Rng& rng);

struct ExtendTo3dResult {
  SeismicCatalog catalog;
  bool isotropic_fallback = false;  // < 3 observed events
  bool degenerate = false;          // collinear observed cloud
};

// PCA off-plane 3D extension: in-plane (r, theta) mapped onto the two
// dominant principal axes of the observed cloud, off-plane coordinate
// resampled from observed minimum-axis projections plus uniform jitter.
ExtendTo3dResult extend_to_3d(const std::vector<Synthetic2DEvent>& synthetic,
                              const SeismicCatalog& observed, Rng& rng,
                              double jitter_halfwidth = 100.0);

struct HyseiOptions {
  int n_realizations = 100;
  double surprise = 0.01;   // spatial floor fraction, as in SaSS
  int n_mag_bins = 31;
  std::optional<double> truncated_top;
  MeshSpec mesh;
  int inversion_max_evals = 300;
  int inversion_restarts = 3;
  InversionBounds bounds;
  const HydraulicParams* warm_start = nullptr;
};

struct HyseiForecastResult {
  std::vector<Forecast> ftws;
  HydraulicParams params;
  double f_s = 1.0;
  double inversion_rmse_mpa = 0.0;
};

// Full HySei recalibration + forecast for one learning period: hydraulic
// inversion, one deterministic pressure run over learning + horizon with
// the planned flow, n_realizations stochastic seed simulations riding on
// it, F_s calibrated on the learning period.
HyseiForecastResult hysei_forecast(const SeismicCatalog& learning_catalog,
                                   const HydraulicSeries& learning_hydraulics,
                                   const HydraulicSeries& pre_stim,
                                   const InjectionPlan& plan,
                                   const TimeWindows& windows,
                                   const VoxelGrid& grid, double mc,
                                   const SeedModelParams& seed_params,
                                   std::uint64_t seed,
                                   const HyseiOptions& opts = {});

}  // namespace hysei
}  // namespace istb
