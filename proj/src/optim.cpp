#include "istb/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace istb {

namespace {

void clip(std::vector<double>& x, const std::vector<double>& lo,
          const std::vector<double>& hi) {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], lo[i], hi[i]);
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0,
                             const std::vector<double>& step,
                             const std::vector<double>& lo,
                             const std::vector<double>& hi, int max_evals,
                             double ftol) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  int evals = 0;
  auto eval = [&](std::vector<double> x) {
    clip(x, lo, hi);
    ++evals;
    return std::make_pair(f(x), x);
  };

  std::vector<std::vector<double>> xs;
  std::vector<double> fs;
  {
    auto [f0, p0] = eval(x0);
    xs.push_back(p0);
    fs.push_back(f0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto x = x0;
    x[i] += step[i] != 0.0 ? step[i] : 1e-3;
    auto [fi, pi] = eval(x);
    xs.push_back(pi);
    fs.push_back(fi);
  }

  auto order = [&]() {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<std::vector<double>> xs2;
    std::vector<double> fs2;
    for (auto i : idx) {
      xs2.push_back(xs[i]);
      fs2.push_back(fs[i]);
    }
    xs = std::move(xs2);
    fs = std::move(fs2);
  };

  order();
  while (evals < max_evals) {
    if (std::abs(fs.back() - fs.front()) <=
        ftol * (std::abs(fs.front()) + ftol)) {
      res.converged = true;
      break;
    }
    // centroid of all but worst
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      for (std::size_t d = 0; d < n; ++d) c[d] += xs[i][d];
    for (auto& v : c) v /= static_cast<double>(n);

    auto combine = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d)
        x[d] = c[d] + coef * (xs.back()[d] - c[d]);
      return x;
    };

    auto [fr, xr] = eval(combine(-1.0));  // reflection
    if (fr < fs.front()) {
      auto [fe, xe] = eval(combine(-2.0));  // expansion
      if (fe < fr) {
        xs.back() = xe;
        fs.back() = fe;
      } else {
        xs.back() = xr;
        fs.back() = fr;
      }
    } else if (fr < fs[fs.size() - 2]) {
      xs.back() = xr;
      fs.back() = fr;
    } else {
      auto [fc, xc] = eval(combine(fr < fs.back() ? -0.5 : 0.5));
      if (fc < std::min(fr, fs.back())) {
        xs.back() = xc;
        fs.back() = fc;
      } else {  // shrink toward the best point
        for (std::size_t i = 1; i < xs.size(); ++i) {
          for (std::size_t d = 0; d < n; ++d)
            xs[i][d] = xs[0][d] + 0.5 * (xs[i][d] - xs[0][d]);
          auto [fi, pi] = eval(xs[i]);
          xs[i] = pi;
          fs[i] = fi;
          if (evals >= max_evals) break;
        }
      }
    }
    order();
  }
  res.x = xs.front();
  res.f = fs.front();
  res.evals = evals;
  return res;
}

}  // namespace istb
