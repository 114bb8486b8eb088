#include "istb/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "istb/rng.hpp"
#include "istb/stats.hpp"

namespace istb {
namespace scenario {

namespace {

double stage_flow(const ScenarioSpec& spec, double t) {
  double q = 0.0;
  for (const auto& s : spec.stages) {
    if (s.t <= t) q = s.flow_lps;
    else break;
  }
  return q;
}

double shut_in_time(const ScenarioSpec& spec) {
  double cut = spec.duration;
  bool pending = false;
  for (const auto& s : spec.stages) {
    if (s.flow_lps == 0.0) {
      if (!pending) {
        cut = s.t;
        pending = true;
      }
    } else {
      pending = false;
      cut = spec.duration;
    }
  }
  return pending ? cut : spec.duration;
}

void validate(const ScenarioSpec& spec) {
  if (spec.stages.empty() || spec.duration <= 0.0)
    throw std::invalid_argument("scenario: empty schedule or duration");
  if (spec.b <= 0.0 || spec.p < 2.0 || spec.diffusivity <= 0.0)
    throw std::invalid_argument("scenario: invalid true parameters");
  for (const auto& s : spec.stages)
    if (s.t < 0.0 || s.t > spec.duration || s.flow_lps < 0.0)
      throw std::invalid_argument("scenario: schedule/horizon mismatch");
}

// Cumulative injected volume of the stage schedule, m^3.
double qc(const ScenarioSpec& spec, double t) {
  double v = 0.0;
  for (std::size_t i = 0; i < spec.stages.size(); ++i) {
    const double t0 = spec.stages[i].t;
    if (t <= t0) break;
    const double t1 =
        i + 1 < spec.stages.size() ? spec.stages[i + 1].t : spec.duration;
    v += spec.stages[i].flow_lps * (std::min(t, t1) - t0);
  }
  return v / 1000.0;
}

}  // namespace

double scenario_intensity(const ScenarioSpec& spec, double t) {
  const double scale = std::pow(10.0, -spec.b * spec.mc - spec.sigma_index);
  const double t0 = shut_in_time(spec);
  if (t < t0) return stage_flow(spec, t) / 1000.0 * scale;
  const double r0a = t0 > 0.0 ? qc(spec, t0) * scale / t0 : 0.0;
  if (r0a <= 0.0) return 0.0;
  return r0a * std::pow(t / t0, -spec.p);
}

double scenario_expected_count(const ScenarioSpec& spec, double t0,
                               double t1) {
  const double scale = std::pow(10.0, -spec.b * spec.mc - spec.sigma_index);
  const double cut = shut_in_time(spec);
  double n = 0.0;
  if (t0 < cut) {
    const double a = std::max(t0, 0.0), b2 = std::min(t1, cut);
    if (b2 > a) n += (qc(spec, b2) - qc(spec, a)) * scale;
  }
  if (t1 > cut && cut > 0.0) {
    const double r0a = qc(spec, cut) * scale / cut;
    const double a = std::max(t0, cut);
    const double c = r0a * std::pow(cut, spec.p) / (spec.p - 1.0);
    n += c * (std::pow(a, 1.0 - spec.p) - std::pow(t1, 1.0 - spec.p));
  }
  return n;
}

Scenario generate_scenario(const ScenarioSpec& spec) {
  validate(spec);
  Scenario out;
  out.shut_in = shut_in_time(spec);
  Rng rng(spec.seed);
  Rng loc_rng = rng.derive(1);
  Rng mag_rng = rng.derive(2);

  // Thinning over breakpoint intervals; the intensity is monotone within
  // each (constant during a stage, decaying after shut-in).
  std::vector<double> breaks{0.0, out.shut_in, spec.duration};
  for (const auto& s : spec.stages) breaks.push_back(s.t);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    if (b <= a) continue;
    const double bound = std::max(scenario_intensity(spec, a),
                                  scenario_intensity(spec, std::nextafter(b, a)));
    if (bound <= 0.0) continue;
    double t = a;
    while (true) {
      double u = rng.uniform();
      while (u == 0.0) u = rng.uniform();
      t += -std::log(u) / bound;
      if (t >= b) break;
      if (rng.uniform() * bound <= scenario_intensity(spec, t)) {
        SeismicEvent e;
        e.t = t;
        const double sd = std::sqrt(4.0 * spec.diffusivity * t);
        e.x = sd * loc_rng.normal();
        e.y = sd * spec.anisotropy_y * loc_rng.normal();
        e.z = sd * spec.anisotropy_z * loc_rng.normal();
        // catalogs report magnitudes rounded to 0.1, so completeness at mc
        // covers true magnitudes from mc - 0.05; this is the convention the
        // half-bin-corrected b estimator expects
        e.m = 0.1 * std::round(10.0 * sample_gr_magnitude(spec.b,
                                                          spec.mc - 0.05,
                                                          mag_rng.uniform(),
                                                          spec.clip_magnitude));
        out.catalog.events.push_back(e);
      }
    }
  }
  out.catalog.mc = spec.mc;

  // Synthetic wellhead pressure: first-order lag response to the flow.
  double p_mpa = 0.0;
  for (double t = 0.0; t <= spec.duration + 0.5 * spec.hydraulic_dt;
       t += spec.hydraulic_dt) {
    out.hydraulics.samples.push_back({t, stage_flow(spec, t), p_mpa});
    const double target = spec.pressure_gain * stage_flow(spec, t);
    p_mpa += (target - p_mpa) * (1.0 - std::exp(-spec.hydraulic_dt /
                                                spec.pressure_tau));
  }
  out.hydraulics.detect_shut_in();
  return out;
}

}  // namespace scenario
}  // namespace istb
