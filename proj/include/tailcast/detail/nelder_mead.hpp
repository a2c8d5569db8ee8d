#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace tailcast::detail {

struct NelderMeadResult {
  std::array<double, 2> x{};
  double f = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::size_t evaluations = 0;
};

/// Two-dimensional Nelder-Mead minimizer with the standard reflection,
/// expansion, contraction and shrink coefficients (1, 2, 1/2, 1/2). Non-finite
/// objective values are treated as +inf, which lets callers encode
/// constraints by returning infinity.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::array<double, 2> start, std::array<double, 2> step,
                             double ftol = 1e-12, double xtol = 1e-9,
                             std::size_t max_evals = 4000) {
  using Point = std::array<double, 2>;
  NelderMeadResult res;
  auto eval = [&](const Point& p) {
    ++res.evaluations;
    const double v = f(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  std::array<Point, 3> pts = {start, Point{start[0] + step[0], start[1]},
                              Point{start[0], start[1] + step[1]}};
  std::array<double, 3> vals{};
  for (int i = 0; i < 3; ++i) vals[i] = eval(pts[i]);

  auto lerp = [](const Point& a, const Point& b, double t) {
    return Point{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
  };

  while (res.evaluations < max_evals) {
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order[0], mid = order[1], worst = order[2];

    double spread = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int d = 0; d < 2; ++d) spread = std::max(spread, std::fabs(pts[i][d] - pts[best][d]));
    }
    if (std::isfinite(vals[worst]) &&
        vals[worst] - vals[best] <= ftol * (1.0 + std::fabs(vals[best])) && spread <= xtol) {
      res.converged = true;
      break;
    }

    const Point centroid = lerp(pts[best], pts[mid], 0.5);
    const Point reflected = lerp(centroid, pts[worst], -1.0);
    const double fr = eval(reflected);
    if (fr < vals[best]) {
      const Point expanded = lerp(centroid, pts[worst], -2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[mid]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Point contracted = outside ? lerp(centroid, reflected, 0.5) : lerp(centroid, pts[worst], 0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    for (int i : {mid, worst}) {
      pts[i] = lerp(pts[best], pts[i], 0.5);
      vals[i] = eval(pts[i]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  res.x = pts[static_cast<std::size_t>(it - vals.begin())];
  res.f = *it;
  return res;
}

}  // namespace tailcast::detail
