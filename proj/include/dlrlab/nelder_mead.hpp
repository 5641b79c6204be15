#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace dlrlab {

struct NelderMeadOptions {
  int max_iters = 4000;
  double f_tol = 1e-13;    // vertex-value spread, scaled by 1 + |f_best|
  double x_tol = 1e-8;     // simplex diameter, sup norm
  double init_step = 0.25; // relative size of the initial simplex
};

struct NelderMeadResult {
  std::vector<double> x;
  double fval = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Downhill simplex minimization (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5). Derivative-free, so objectives with cusps are fine.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0,
                                    const NelderMeadOptions& opts = {}) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> verts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    const double step = x0[i] != 0.0 ? opts.init_step * std::abs(x0[i]) : opts.init_step;
    verts[i + 1][i] += step;
  }
  std::vector<double> fvals(n + 1);
  for (std::size_t v = 0; v <= n; ++v) fvals[v] = f(verts[v]);

  std::vector<std::size_t> order(n + 1);
  auto sort_order = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
  };

  NelderMeadResult result;
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    sort_order();
    const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];

    double diameter = 0.0;
    for (std::size_t v = 0; v <= n; ++v)
      for (std::size_t i = 0; i < n; ++i)
        diameter = std::max(diameter, std::abs(verts[v][i] - verts[best][i]));
    const double spread = std::abs(fvals[worst] - fvals[best]);
    if (diameter < opts.x_tol && spread < opts.f_tol * (1.0 + std::abs(fvals[best]))) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v <= n; ++v) {
      if (v == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += verts[v][i];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + coef * (centroid[i] - verts[worst][i]);
      return p;
    };

    auto reflected = blend(1.0);
    const double fr = f(reflected);
    if (fr < fvals[best]) {
      auto expanded = blend(2.0);
      const double fe = f(expanded);
      if (fe < fr) { verts[worst] = std::move(expanded); fvals[worst] = fe; }
      else         { verts[worst] = std::move(reflected); fvals[worst] = fr; }
    } else if (fr < fvals[second_worst]) {
      verts[worst] = std::move(reflected);
      fvals[worst] = fr;
    } else {
      const bool outside = fr < fvals[worst];
      auto contracted = blend(outside ? 0.5 : -0.5);
      const double fc = f(contracted);
      if (fc < (outside ? fr : fvals[worst])) {
        verts[worst] = std::move(contracted);
        fvals[worst] = fc;
      } else {
        for (std::size_t v = 0; v <= n; ++v) {
          if (v == best) continue;
          for (std::size_t i = 0; i < n; ++i)
            verts[v][i] = verts[best][i] + 0.5 * (verts[v][i] - verts[best][i]);
          fvals[v] = f(verts[v]);
        }
      }
    }
  }

  sort_order();
  result.x = verts[order[0]];
  result.fval = fvals[order[0]];
  result.iterations = iter;
  return result;
}

}  // namespace dlrlab
