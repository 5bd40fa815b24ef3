#include "alber/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace alber {

const std::array<double, 16>& GaussLegendre16::nodes() {
  static const std::array<double, 16> x = {
      -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
      -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
      0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
      0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
  return x;
}

const std::array<double, 16>& GaussLegendre16::weights() {
  static const std::array<double, 16> w = {
      0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
      0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
      0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
  return w;
}

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  std::vector<double> w(x.size(), 0.0);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = x[i + 1] - x[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

std::vector<double> graded_grid(double lo, double hi, double core_lo, double core_hi,
                                int n_core, int n_tail) {
  core_lo = std::max(core_lo, lo);
  core_hi = std::min(core_hi, hi);
  if (!(core_hi > core_lo)) {
    core_lo = lo;
    core_hi = hi;
  }
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(n_core + 2 * n_tail + 2));
  // left tail: geometric spacing growing away from the core
  if (lo < core_lo && n_tail > 0) {
    const double span = core_lo - lo;
    for (int i = n_tail; i >= 1; --i) {
      const double u = static_cast<double>(i) / n_tail;
      g.push_back(core_lo - span * (std::expm1(4.0 * u) / std::expm1(4.0)));
    }
  }
  for (int i = 0; i <= n_core; ++i)
    g.push_back(core_lo + (core_hi - core_lo) * i / static_cast<double>(n_core));
  if (hi > core_hi && n_tail > 0) {
    const double span = hi - core_hi;
    for (int i = 1; i <= n_tail; ++i) {
      const double u = static_cast<double>(i) / n_tail;
      g.push_back(core_hi + span * (std::expm1(4.0 * u) / std::expm1(4.0)));
    }
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

}  // namespace alber
