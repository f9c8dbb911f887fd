#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "packbound/errors.hpp"

namespace packbound {

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Nelder-Mead simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2). The initial
/// simplex is x0 plus one step along each coordinate. Non-finite objective
/// values are treated as +infinity, so infeasible regions can be signalled
/// that way.
template <class Objective>
SimplexResult nelder_mead(Objective&& f, std::vector<double> x0, const std::vector<double>& steps,
                          int max_iterations, double ftol = 1e-15) {
  const std::size_t n = x0.size();
  if (n == 0 || steps.size() != n || max_iterations < 0) {
    throw InvalidInput("nelder_mead: dimension mismatch");
  }
  int evaluations = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] += steps[i];
  }
  for (std::size_t i = 0; i <= n; ++i) {
    vals[i] = eval(pts[i]);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto along = [&](std::vector<double>& out, const std::vector<double>& worst, double t) {
    for (std::size_t d = 0; d < n; ++d) {
      out[d] = centroid[d] + t * (worst[d] - centroid[d]);
    }
  };

  int it = 0;
  for (; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    if (std::isfinite(vals[worst]) && std::abs(vals[worst] - vals[best]) <= ftol * (1.0 + std::abs(vals[best]))) {
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    along(trial, pts[worst], -1.0);
    const double fr = eval(trial);
    if (fr < vals[best]) {
      along(trial2, pts[worst], -2.0);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    along(trial2, pts[worst], outside ? -0.5 : 0.5);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d) {
        pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
      }
      vals[i] = eval(pts[i]);
    }
  }

  const std::size_t best =
      static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], it, evaluations};
}

}  // namespace packbound
