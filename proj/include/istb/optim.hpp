#pragma once

#include <functional>
#include <vector>

namespace istb {

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

// Derivative-free simplex minimization with box bounds (points are
// clipped into [lo, hi] before evaluation).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0,
                             const std::vector<double>& step,
                             const std::vector<double>& lo,
                             const std::vector<double>& hi,
                             int max_evals = 400, double ftol = 1e-10);

}  // namespace istb
