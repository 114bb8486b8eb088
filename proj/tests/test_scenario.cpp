#include <doctest.h>

#include <cmath>
#include <vector>

#include "istb/scenario.hpp"
#include "istb/stats.hpp"

using namespace istb;
using namespace istb::scenario;

namespace {

ScenarioSpec base_spec() {
  ScenarioSpec s;
  s.stages = {{0.0, 30.0}, {2.0 * 86400.0, 0.0}};
  s.duration = 3.0 * 86400.0;
  s.sigma_index = -0.5;
  s.b = 1.0;
  s.p = 2.5;
  s.mc = 0.9;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("deterministic per seed, different across seeds") {
  auto spec = base_spec();
  const auto a = generate_scenario(spec);
  const auto b = generate_scenario(spec);
  REQUIRE(a.catalog.size() == b.catalog.size());
  for (std::size_t i = 0; i < a.catalog.size(); ++i) {
    CHECK(a.catalog.events[i].t == b.catalog.events[i].t);
    CHECK(a.catalog.events[i].x == b.catalog.events[i].x);
    CHECK(a.catalog.events[i].m == b.catalog.events[i].m);
  }
  spec.seed = 4;
  const auto c = generate_scenario(spec);
  CHECK(c.catalog.size() != a.catalog.size());
}

TEST_CASE("zero-flow schedule produces no events") {
  auto spec = base_spec();
  spec.stages = {{0.0, 0.0}};
  const auto sc = generate_scenario(spec);
  CHECK(sc.catalog.empty());
}

TEST_CASE("magnitude clipping is respected") {
  auto spec = base_spec();
  spec.sigma_index = -1.2;  // more events, more tail exposure
  spec.clip_magnitude = 1.8;
  const auto sc = generate_scenario(spec);
  REQUIRE(sc.catalog.size() > 100);
  for (const auto& e : sc.catalog.events) CHECK(e.m <= 1.8 + 1e-12);
}

TEST_CASE("hydraulics carry the schedule and detect shut-in") {
  const auto sc = generate_scenario(base_spec());
  CHECK(sc.shut_in == doctest::Approx(2.0 * 86400.0));
  CHECK(sc.hydraulics.shut_in_time == doctest::Approx(2.0 * 86400.0));
  CHECK(sc.hydraulics.flow_at(1000.0) == doctest::Approx(30.0));
  CHECK(sc.hydraulics.flow_at(2.5 * 86400.0) == doctest::Approx(0.0));
  // wellhead pressure rises toward gain * flow during injection
  CHECK(sc.hydraulics.pressure_at(1.9 * 86400.0) ==
        doctest::Approx(0.3 * 30.0).epsilon(0.01));
}

TEST_CASE("realized counts track the intensity integral") {
  auto spec = base_spec();
  const double expected = scenario_expected_count(spec, 0.0, spec.duration);
  REQUIRE(expected > 20.0);
  const auto [lo, hi] = poisson_ci95(expected);
  int inside = 0;
  for (int s = 0; s < 100; ++s) {
    spec.seed = 100 + s;
    const long n = static_cast<long>(generate_scenario(spec).catalog.size());
    if (n >= lo && n <= hi) ++inside;
  }
  CHECK(inside >= 90);
}

TEST_CASE("count dispersion across seeds is Poisson-like") {
  auto spec = base_spec();
  std::vector<double> counts;
  for (int s = 0; s < 100; ++s) {
    spec.seed = 500 + s;
    counts.push_back(static_cast<double>(generate_scenario(spec).catalog.size()));
  }
  const double m = mean(counts);
  double chi2 = 0.0;
  for (const double k : counts) chi2 += (k - m) * (k - m) / m;
  // chi-square with 99 dof, 0.5%..99.5% quantiles
  CHECK(chi2 > 66.0);
  CHECK(chi2 < 140.0);
}

TEST_CASE("location spread follows 4*D*t") {
  auto spec = base_spec();
  spec.sigma_index = -2.3;  // ~1e4 events
  spec.diffusivity = 0.05;
  spec.stages = {{0.0, 30.0}};
  spec.duration = 5.0 * 86400.0;
  const auto sc = generate_scenario(spec);
  REQUIRE(sc.catalog.size() > 5000);
  double ss = 0.0, vt = 0.0;
  long n = 0;
  for (const auto& e : sc.catalog.events) {
    if (e.t < 86400.0) continue;  // past the first day
    ss += e.x * e.x;
    vt += 4.0 * spec.diffusivity * e.t;
    ++n;
  }
  REQUIRE(n > 3000);
  CHECK(ss / n == doctest::Approx(vt / n).epsilon(0.10));
}

TEST_CASE("post-shut-in expected count matches the closed form") {
  auto spec = base_spec();
  const double t0 = 2.0 * 86400.0;
  // r0a = Qc(t0) * scale / t0; integral of r0a (t/t0)^-p over [t0, 3d]
  const double scale = std::pow(10.0, -spec.b * spec.mc - spec.sigma_index);
  const double qc = 30.0 * t0 / 1000.0;
  const double r0a = qc * scale / t0;
  const double p = spec.p;
  const double want = r0a * std::pow(t0, p) / (p - 1.0) *
                      (std::pow(t0, 1.0 - p) -
                       std::pow(3.0 * 86400.0, 1.0 - p));
  CHECK(scenario_expected_count(spec, t0, 3.0 * 86400.0) ==
        doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("invalid specs are rejected") {
  auto spec = base_spec();
  spec.stages.clear();
  CHECK_THROWS(generate_scenario(spec));
  spec = base_spec();
  spec.stages[0].t = -5.0;
  CHECK_THROWS(generate_scenario(spec));
  spec = base_spec();
  spec.b = 0.0;
  CHECK_THROWS(generate_scenario(spec));
}

}  // TEST_SUITE
