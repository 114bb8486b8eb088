#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "istb/types.hpp"

namespace istb {
namespace scenario {

// Ground-truth synthetic stimulation scenario: the stand-in for the
// proprietary stimulation datasets, with every generating parameter known.
struct ScenarioSpec {
  struct Stage {
    double t = 0.0;         // stage start, s
    double flow_lps = 0.0;  // constant rate until the next stage
  };
  std::vector<Stage> stages;  // last stage with flow 0 defines shut-in
  double duration = 0.0;      // total simulated span, s

  double sigma_index = -1.0;  // true seismogenic index
  double b = 1.0;             // true GR slope
  double p = 2.0;             // true decay exponent (>= 2)
  double mc = 0.0;            // completeness threshold for the catalog

  double diffusivity = 0.05;          // m^2/s, location spread 4*D*t
  double anisotropy_y = 1.0;          // axis scale factors relative to x
  double anisotropy_z = 1.0;
  std::optional<double> clip_magnitude;  // Soultz-style saturation

  double pressure_gain = 0.3;   // MPa per L/s, synthetic wellhead response
  double pressure_tau = 7200.0; // first-order lag, s

  double hydraulic_dt = 60.0;   // sampling step of the emitted series

  std::uint64_t seed = 1;
};

struct Scenario {
  HydraulicSeries hydraulics;
  SeismicCatalog catalog;
  double shut_in = 0.0;
};

// Event times from the nonhomogeneous Poisson intensity implied by the
// seismogenic-index rate law during injection and the power-law decay
// after shut-in (thinning sampler); magnitudes GR(b) above mc; locations
// from a Gaussian cloud with variance 4*D*t per axis.
Scenario generate_scenario(const ScenarioSpec& spec);

// Intensity of the generating process at time t, events/s (the oracle
// the sampler is verified against).
double scenario_intensity(const ScenarioSpec& spec, double t);

// Integral of the intensity over [t0, t1].
double scenario_expected_count(const ScenarioSpec& spec, double t0, double t1);

}  // namespace scenario
}  // namespace istb
