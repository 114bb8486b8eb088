#include "istb/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "istb/stats.hpp"

namespace istb {
namespace eval {

namespace {

// Index of the 5th percentile in a sorted sample of size n.
std::size_t pct5_index(std::size_t n) {
  return static_cast<std::size_t>(std::floor(0.05 * (n - 1)));
}

double multinomial_ll(const std::vector<long>& counts,
                      const std::vector<double>& probs) {
  double ll = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    ll += counts[i] * std::log(std::max(probs[i], kRateFloor));
  }
  return ll;
}

// Sample an index from a discrete CDF by binary search.
int sample_cdf(const std::vector<double>& cdf, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

}  // namespace

TestOutcome n_test(double forecast_mean, long observed) {
  if (forecast_mean < 0.0)
    throw std::domain_error("n_test: negative forecast mean");
  const auto [lo, hi] = poisson_ci95(forecast_mean);
  TestOutcome out;
  out.kind = TestKind::Number;
  out.statistic = static_cast<double>(observed);
  out.ref_lo = static_cast<double>(lo);
  out.ref_hi = static_cast<double>(hi);
  out.pass = observed >= lo && observed <= hi;
  out.overprediction = observed < lo;
  out.underprediction = observed > hi;
  return out;
}

TestOutcome m_test(const MagnitudePMF& forecast,
                   const std::vector<double>& observed_magnitudes, int n_sim,
                   Rng& rng) {
  forecast.validate();
  TestOutcome out;
  out.kind = TestKind::Magnitude;
  if (observed_magnitudes.empty()) {
    out.pass = true;
    out.no_events = true;
    return out;
  }
  const std::size_t n_bins = forecast.probs.size();
  std::vector<long> obs(n_bins, 0);
  for (double m : observed_magnitudes) ++obs[forecast.bin_of(m)];
  out.statistic = multinomial_ll(obs, forecast.probs);

  std::vector<double> cdf(n_bins);
  double acc = 0.0;
  for (std::size_t i = 0; i < n_bins; ++i) {
    acc += forecast.probs[i];
    cdf[i] = acc;
  }
  std::vector<double> sims(n_sim);
  std::vector<long> sim_counts(n_bins);
  const long n_events = static_cast<long>(observed_magnitudes.size());
  for (int s = 0; s < n_sim; ++s) {
    std::fill(sim_counts.begin(), sim_counts.end(), 0);
    for (long e = 0; e < n_events; ++e)
      ++sim_counts[sample_cdf(cdf, rng.uniform())];
    sims[s] = multinomial_ll(sim_counts, forecast.probs);
  }
  std::sort(sims.begin(), sims.end());
  out.ref_lo = sims[pct5_index(sims.size())];
  out.pass = out.statistic >= out.ref_lo;
  return out;
}

double poisson_joint_ll(const VoxelGrid& rates,
                        const std::vector<long>& observed_counts,
                        std::size_t* floor_hits) {
  if (observed_counts.size() != rates.values.size())
    throw std::invalid_argument("poisson_joint_ll: grid size mismatch");
  std::vector<double> terms;
  terms.reserve(observed_counts.size());
  std::size_t floored = 0;
  for (std::size_t i = 0; i < observed_counts.size(); ++i) {
    const long k = observed_counts[i];
    if (k < 0) throw std::invalid_argument("poisson_joint_ll: negative count");
    double lam = rates.values[i];
    if (lam < kRateFloor) {
      lam = kRateFloor;
      ++floored;
    }
    terms.push_back(k * std::log(lam) - lam - std::lgamma(k + 1.0));
  }
  if (floor_hits) *floor_hits = floored;
  return kahan_sum(terms);
}

VoxelCounts count_events(const std::vector<SeismicEvent>& events,
                         const VoxelGrid& grid) {
  VoxelCounts out;
  out.counts.assign(static_cast<std::size_t>(grid.n()), 0);
  for (const auto& e : events) {
    bool clamped = false;
    ++out.counts[grid.index_clamped(e.x, e.y, e.z, &clamped)];
    if (clamped) ++out.n_clamped;
    ++out.total;
  }
  return out;
}

TestOutcome s_test(const Forecast& forecast,
                   const std::vector<SeismicEvent>& observed,
                   const VoxelGrid& grid, int n_sim, Rng& rng) {
  TestOutcome out;
  out.kind = TestKind::Space;
  if (observed.empty()) {
    out.pass = true;
    out.no_events = true;
    return out;
  }
  const auto obs = count_events(observed, grid);
  const double n_obs = static_cast<double>(obs.total);

  // Normalize the forecast so the total rate matches the observed count.
  VoxelGrid rates = forecast.spatial_pdf;
  const double total = rates.sum();
  if (total <= 0.0) throw std::domain_error("s_test: zero forecast grid");
  for (auto& v : rates.values) v *= n_obs / total;

  out.statistic = poisson_joint_ll(rates, obs.counts);

  std::vector<double> cdf(rates.values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += rates.values[i];
    cdf[i] = acc;
  }
  std::vector<long> sim_counts(rates.values.size());
  std::vector<double> sims(n_sim);
  for (int s = 0; s < n_sim; ++s) {
    std::fill(sim_counts.begin(), sim_counts.end(), 0);
    for (long e = 0; e < obs.total; ++e)
      ++sim_counts[sample_cdf(cdf, rng.uniform())];
    sims[s] = poisson_joint_ll(rates, sim_counts);
  }
  std::sort(sims.begin(), sims.end());
  out.ref_lo = sims[pct5_index(sims.size())];
  out.pass = out.statistic >= out.ref_lo;
  return out;
}

std::optional<double> ll_per_eqk(double joint_ll, long observed_count) {
  if (observed_count < 1) return std::nullopt;
  return joint_ll / static_cast<double>(observed_count);
}

std::vector<GainSample> information_gain(const Forecast& a, const Forecast& b,
                                         const std::vector<SeismicEvent>& observed,
                                         const VoxelGrid& grid, int ftw_id) {
  std::vector<GainSample> out;
  if (observed.empty()) return out;
  const VoxelGrid ra = a.rate_grid();
  const VoxelGrid rb = b.rate_grid();
  if (ra.values.size() != rb.values.size())
    throw std::invalid_argument("information_gain: grid mismatch");
  const double n = static_cast<double>(observed.size());
  const double count_term = (-a.expected_count + b.expected_count) / n;
  for (const auto& e : observed) {
    const int idx = grid.index_clamped(e.x, e.y, e.z);
    const double la = std::max(ra.values[idx], kRateFloor);
    const double lb = std::max(rb.values[idx], kRateFloor);
    GainSample g;
    // log difference (not log of the ratio) keeps I(A,B) == -I(B,A) exact
    g.value = count_term + (std::log(la) - std::log(lb));
    g.voxel = idx;
    g.ftw = ftw_id;
    out.push_back(g);
  }
  return out;
}

GainSummary summarize_gain(const std::vector<double>& samples,
                           GainEstimator method, int n_boot, Rng& rng) {
  if (samples.empty())
    throw std::invalid_argument("summarize_gain: empty sample");
  GainSummary out;
  out.estimator = method;
  out.n = samples.size();
  const std::size_t n = samples.size();

  switch (method) {
    case GainEstimator::Classical: {
      out.value = mean(samples);
      if (n >= 2) {
        double ss = 0.0;
        for (double x : samples) ss += (x - out.value) * (x - out.value);
        const double se = std::sqrt(ss / (n - 1.0) / n);
        const double t = student_t_quantile(0.975, static_cast<double>(n - 1));
        out.ci_lo = out.value - t * se;
        out.ci_hi = out.value + t * se;
        out.has_ci = true;
      }
      break;
    }
    case GainEstimator::Robust: {
      out.value = huber_location(samples);
      break;  // no CI unless bootstrapped separately
    }
    case GainEstimator::BootMean:
    case GainEstimator::BootMedian: {
      if (n < 2) {
        out.value = samples[0];
        break;
      }
      std::vector<double> stats(n_boot);
      std::vector<double> resample(n);
      for (int bsm = 0; bsm < n_boot; ++bsm) {
        for (std::size_t i = 0; i < n; ++i)
          resample[i] = samples[rng.below(n)];
        stats[bsm] = method == GainEstimator::BootMean ? mean(resample)
                                                       : median(resample);
      }
      out.value = method == GainEstimator::BootMean ? mean(stats)
                                                    : median(stats);
      std::sort(stats.begin(), stats.end());
      out.ci_lo = stats[static_cast<std::size_t>(0.025 * (n_boot - 1))];
      out.ci_hi = stats[static_cast<std::size_t>(std::ceil(0.975 * (n_boot - 1)))];
      out.has_ci = true;
      break;
    }
  }
  if (out.has_ci) out.significant = out.ci_lo > 0.0 || out.ci_hi < 0.0;
  return out;
}

double exponentiate_gain(double avg_gain) {
  if (!std::isfinite(avg_gain))
    throw std::domain_error("exponentiate_gain: non-finite input");
  return std::exp(avg_gain);
}

std::string estimator_name(GainEstimator e) {
  switch (e) {
    case GainEstimator::Classical: return "classical";
    case GainEstimator::Robust: return "robust";
    case GainEstimator::BootMean: return "boot_mean";
    case GainEstimator::BootMedian: return "boot_median";
  }
  return "?";
}

}  // namespace eval
}  // namespace istb
