#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "istb/types.hpp"

namespace istb {

// Aki-Utsu maximum-likelihood b-value with the half-bin correction:
//   b = log10(e) / (mean(m) - (mc - bin/2))
// Throws if fewer than 2 usable magnitudes or a degenerate sample.
double estimate_b_value(const std::vector<double>& magnitudes, double mc,
                        double bin = 0.1);
double estimate_b_value(const SeismicCatalog& catalog, double mc,
                        double bin = 0.1);

// Inverse-CDF sample of the Gutenberg-Richter magnitude distribution:
//   m = m_min - log10(1 - u) / b
// Values above truncated_top (when set) are clamped to it.
double sample_gr_magnitude(double b, double m_min, double u,
                           std::optional<double> truncated_top = std::nullopt);

// Discrete GR magnitude PMF over n_bins bins of bin_width starting at
// m_min. When truncated_top is set, the final bin absorbs the whole tail.
MagnitudePMF gr_magnitude_pmf(double b, double m_min, int n_bins,
                              double bin_width = 0.1,
                              bool truncated_top = false);

// Poisson CDF P(X <= k) for X ~ Poisson(mean).
double poisson_cdf(int k, double mean);

// Smallest central 95% interval: CDF(lo-1) <= 0.025 and CDF(hi) >= 0.975.
std::pair<long, long> poisson_ci95(double mean);

// log of the Poisson pmf, k >= 0, lambda > 0.
double poisson_log_pmf(long k, double lambda);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided Student-t quantile: P(T <= result) = p for df degrees of freedom.
double student_t_quantile(double p, double df);

// Huber M-estimator of location (tuning c, MAD scale, iterated to tol).
// Falls back to the median when the MAD is zero.
double huber_location(const std::vector<double>& xs, double c = 1.345,
                      double tol = 1e-8);

double mean(const std::vector<double>& xs);
double median(std::vector<double> xs);

// Kahan-compensated sum.
double kahan_sum(const std::vector<double>& xs);

}  // namespace istb
