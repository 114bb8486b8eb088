#include "istb/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace istb {

double estimate_b_value(const std::vector<double>& magnitudes, double mc,
                        double bin) {
  std::vector<double> ms;
  for (double m : magnitudes)
    if (m >= mc) ms.push_back(m);
  if (ms.size() < 2)
    throw std::invalid_argument("estimate_b_value: insufficient data (< 2 events)");
  double sum = 0.0;
  for (double m : ms) sum += m;
  const double mbar = sum / static_cast<double>(ms.size());
  const double denom = mbar - (mc - 0.5 * bin);
  if (denom <= 0.0)
    throw std::domain_error("estimate_b_value: degenerate sample");
  return std::log10(std::exp(1.0)) / denom;
}

double estimate_b_value(const SeismicCatalog& catalog, double mc, double bin) {
  std::vector<double> ms;
  ms.reserve(catalog.events.size());
  for (const auto& e : catalog.events) ms.push_back(e.m);
  return estimate_b_value(ms, mc, bin);
}

double sample_gr_magnitude(double b, double m_min, double u,
                           std::optional<double> truncated_top) {
  if (b <= 0.0) throw std::invalid_argument("sample_gr_magnitude: b must be > 0");
  if (u < 0.0 || u >= 1.0)
    throw std::domain_error("sample_gr_magnitude: u outside [0, 1)");
  double m = m_min - std::log10(1.0 - u) / b;
  if (truncated_top && m > *truncated_top) m = *truncated_top;
  return m;
}

MagnitudePMF gr_magnitude_pmf(double b, double m_min, int n_bins,
                              double bin_width, bool truncated_top) {
  if (b <= 0.0 || n_bins < 1 || bin_width <= 0.0)
    throw std::invalid_argument("gr_magnitude_pmf: invalid parameters");
  MagnitudePMF pmf;
  pmf.m_min = m_min;
  pmf.bin_width = bin_width;
  pmf.truncated_top = truncated_top;
  pmf.probs.resize(n_bins);
  // GR survival above m_min: S(dm) = 10^(-b*dm)
  auto surv = [&](double dm) { return std::pow(10.0, -b * dm); };
  for (int i = 0; i < n_bins; ++i)
    pmf.probs[i] = surv(i * bin_width) - surv((i + 1) * bin_width);
  // The final bin absorbs the tail. Without truncation this is still the
  // honest choice for a finite PMF; truncated_top records the semantics.
  pmf.probs[n_bins - 1] += surv(n_bins * bin_width);
  return pmf;
}

double poisson_log_pmf(long k, double lambda) {
  if (k < 0) throw std::invalid_argument("poisson_log_pmf: negative count");
  if (lambda <= 0.0)
    throw std::domain_error("poisson_log_pmf: lambda must be > 0");
  return static_cast<double>(k) * std::log(lambda) - lambda -
         std::lgamma(static_cast<double>(k) + 1.0);
}

namespace {

// Summation starts 12 sigma below the mean so exp(-mean) underflow for
// large means cannot zero out the whole series; the skipped lower tail
// carries < 1e-20 of mass.
long poisson_sum_start(double mean) {
  const double lo = mean - 12.0 * std::sqrt(mean) - 12.0;
  return lo > 0.0 ? static_cast<long>(lo) : 0;
}

double poisson_pmf(long k, double mean) {
  return std::exp(static_cast<double>(k) * std::log(mean) - mean -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

}  // namespace

double poisson_cdf(int k, double mean) {
  if (k < 0) return 0.0;
  if (mean == 0.0) return 1.0;
  double s = 0.0;
  for (long i = poisson_sum_start(mean); i <= k; ++i)
    s += poisson_pmf(i, mean);
  return std::min(s, 1.0);
}

std::pair<long, long> poisson_ci95(double mean) {
  if (mean < 0.0) throw std::domain_error("poisson_ci95: negative mean");
  if (mean == 0.0) return {0, 0};
  double cdf = 0.0;
  long lo = -1, hi = -1;
  for (long k = poisson_sum_start(mean); hi < 0; ++k) {
    cdf += poisson_pmf(k, mean);
    // lo: largest k with P(X < k) <= 0.025; hi: smallest with P(X <= k) >= 0.975
    if (lo < 0 && cdf > 0.025) lo = k;
    if (cdf >= 0.975) hi = k;
  }
  return {lo, hi};
}

namespace {

double beta_cont_frac(double a, double b, double x) {
  // Lentz's continued fraction for the incomplete beta function.
  const double eps = 1e-15, tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_cont_frac(a, b, x) / a;
  return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

namespace {

double student_t_cdf(double t, double df) {
  const double x = df / (df + t * t);
  const double p = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - p : p;
}

}  // namespace

double student_t_quantile(double p, double df) {
  if (p <= 0.0 || p >= 1.0)
    throw std::domain_error("student_t_quantile: p outside (0, 1)");
  double lo = -1e3, hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  return kahan_sum(xs) / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty sample");
  const std::size_t n = xs.size();
  std::nth_element(xs.begin(), xs.begin() + n / 2, xs.end());
  double hi = xs[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(xs.begin(), xs.begin() + n / 2 - 1, xs.end());
  return 0.5 * (xs[n / 2 - 1] + hi);
}

double huber_location(const std::vector<double>& xs, double c, double tol) {
  if (xs.empty()) throw std::invalid_argument("huber_location: empty sample");
  const double med = median(xs);
  std::vector<double> dev;
  dev.reserve(xs.size());
  for (double x : xs) dev.push_back(std::abs(x - med));
  const double scale = 1.4826 * median(dev);
  if (scale == 0.0) return med;
  double mu = med;
  for (int it = 0; it < 1000; ++it) {
    double num = 0.0, den = 0.0;
    for (double x : xs) {
      const double r = (x - mu) / scale;
      const double w = std::abs(r) <= c ? 1.0 : c / std::abs(r);
      num += w * x;
      den += w;
    }
    const double next = num / den;
    if (std::abs(next - mu) < tol) return next;
    mu = next;
  }
  return mu;
}

double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, comp = 0.0;
  for (double v : xs) {
    const double y = v - comp;
    const double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return s;
}

}  // namespace istb
