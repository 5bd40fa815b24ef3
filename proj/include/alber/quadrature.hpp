#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "alber/common.hpp"

namespace alber {

// 16-point Gauss-Legendre rule on [-1,1].
struct GaussLegendre16 {
  static constexpr int n = 16;
  static const std::array<double, 16>& nodes();
  static const std::array<double, 16>& weights();
};

/// Composite 16-point Gauss-Legendre over [a,b] with `panels` equal panels.
template <class F>
auto gl_composite(F&& f, double a, double b, int panels) -> decltype(f(0.0)) {
  using R = decltype(f(0.0));
  const auto& xs = GaussLegendre16::nodes();
  const auto& ws = GaussLegendre16::weights();
  R total{};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    R acc{};
    for (int i = 0; i < GaussLegendre16::n; ++i) acc += ws[i] * f(mid + 0.5 * h * xs[i]);
    total += acc * (0.5 * h);
  }
  return total;
}

struct QuadConfig {
  double rel_tol = 1e-9;
  int base_panels = 32;     // starting panel count for adaptive refinement
  int max_doublings = 7;    // hard cap: base_panels * 2^max_doublings panels
  double plemelj_tol = 1e-4;
  double pv_window = 0.5;   // half-width of the symmetric subtraction window
};

/// Panel-doubling refinement until the relative change drops below rel_tol.
template <class F>
auto gl_adaptive(F&& f, double a, double b, const QuadConfig& cfg) -> decltype(f(0.0)) {
  if (!(b > a)) return decltype(f(0.0)){};
  auto prev = gl_composite(f, a, b, cfg.base_panels);
  int panels = cfg.base_panels;
  for (int d = 0; d < cfg.max_doublings; ++d) {
    panels *= 2;
    auto cur = gl_composite(f, a, b, panels);
    if (std::abs(cur - prev) <= cfg.rel_tol * (std::abs(cur) + 1e-300)) return cur;
    prev = cur;
  }
  return prev;
}

/// Adaptive integration over [a,b] graded towards a distinguished point x0:
/// [a,b] is split at dyadic distances from x0 so integrands with a short
/// length scale near x0 (Cauchy kernels) converge without global refinement.
template <class F>
auto gl_graded(F&& f, double a, double b, double x0, double scale, const QuadConfig& cfg)
    -> decltype(f(0.0)) {
  using R = decltype(f(0.0));
  if (!(b > a)) return R{};
  std::vector<double> cuts;
  cuts.push_back(a);
  cuts.push_back(b);
  for (double d = scale; d < (b - a) + std::abs(x0 - a) + std::abs(b - x0); d *= 2.0) {
    for (double c : {x0 - d, x0 + d})
      if (c > a && c < b) cuts.push_back(c);
  }
  if (x0 > a && x0 < b) cuts.push_back(x0);
  std::sort(cuts.begin(), cuts.end());
  R total{};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += gl_adaptive(f, cuts[i], cuts[i + 1], cfg);
  return total;
}

/// Trapezoid weights for an arbitrary sorted grid.
std::vector<double> trapezoid_weights(const std::vector<double>& x);

/// Grid that is uniform on the core interval and geometrically graded on the
/// tails, covering [lo,hi] with the core [core_lo,core_hi] clipped inside.
std::vector<double> graded_grid(double lo, double hi, double core_lo, double core_hi,
                                int n_core, int n_tail);

}  // namespace alber
