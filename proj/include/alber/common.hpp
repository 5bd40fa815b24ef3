#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace alber {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Configuration / input problems (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failures: non-convergence, blown tolerances (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  Interval inflated(double m) const { return {lo - m, hi + m}; }
};

/// Runs fn(i) for i in [0, n). workers <= 1 is the serial reference path;
/// otherwise OpenMP with the requested thread count. Results must be written
/// by index so both paths are bit-identical.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
    fn(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct PhysicalParams {
  // NLS i u_t + (p/2) u_xx + (q/2)|u|^2 u = 0.  Defaults give the rescaled
  // unit-carrier convention where the instability target 4*pi*p/q = 1/(4*pi).
  double p = 1.0 / (4.0 * pi);
  double q = 4.0 * pi;
  double epsilon = 0.0;

  bool focusing() const { return p * q > 0.0; }
  double target() const { return 4.0 * pi * p / q; }

  void validate() const {
    if (p == 0.0 || q == 0.0) throw ConfigError("physical params: p and q must be nonzero");
    if (epsilon < 0.0) throw ConfigError("physical params: epsilon must be >= 0");
  }
};

}  // namespace alber
