#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "alber/common.hpp"

namespace alber {

struct JonswapParams {
  double alpha = 0.01;       // power parameter `a`
  double gamma = 3.3;        // peak enhancement, >= 1
  double k0 = 1.0;           // carrier wavenumber (rescaled to 1 internally)
  double delta_low = 0.07;   // peak width for k <= k0
  double delta_high = 0.09;  // peak width for k >  k0

  void validate() const;
};

/// Closed-form JONSWAP density S(k) = a/(2k^3) exp(-5/4 (k0/k)^2) gamma^(...):
double jonswap_eval(const JonswapParams& p, double k);
/// Analytic derivative of the same closed form.
double jonswap_deriv(const JonswapParams& p, double k);

/// A compactly supported spectrum P(k) >= 0. Immutable after construction.
class Spectrum {
 public:
  Spectrum() = default;  // P == 0

  /// JONSWAP truncated to compact support and rescaled to unit carrier.
  static Spectrum jonswap(const JonswapParams& p, double threshold_fraction = 1e-10);
  /// As above but keeping the carrier at p.k0 (used to test rescale invariance).
  static Spectrum jonswap_raw(const JonswapParams& p, double threshold_fraction = 1e-10);

  /// Generic truncation of a raw nonnegative density to compact support:
  /// support is the smallest interval outside which raw < threshold * max.
  static Spectrum truncate_to_compact(std::function<double(double)> raw, Interval search,
                                      double threshold_fraction,
                                      std::function<double(double)> raw_deriv = nullptr);

  /// Natural-cubic-spline spectrum from strictly increasing samples.
  static Spectrum from_samples(const std::vector<double>& k, const std::vector<double>& p,
                               double threshold_fraction = 1e-10);

  /// Two-column text file (k, P(k)); '#' comments; strictly increasing k.
  static Spectrum load_table(const std::string& path, double threshold_fraction = 1e-10);

  bool is_zero() const { return zero_; }
  double operator()(double k) const;
  double derivative(double k) const;
  Interval support() const { return support_; }
  double integral() const { return integral_; }
  double peak_k() const { return peak_k_; }
  double peak_value() const { return peak_value_; }
  double threshold_fraction() const { return threshold_; }

  /// Symmetric difference quotient D_X P(k); the X = 0 branch is P'(k).
  double dxp(double X, double k) const;
  Interval dxp_support(double X) const { return support_.inflated(std::abs(X) / 2.0); }

  /// Smallest interval holding all but `mass_frac` of the integral on each
  /// side; used to bound oscillatory quadrature to where the mass lives.
  Interval effective_support(double mass_frac) const;

  /// Sample grid used for quadrature skeletons (dense core, graded tails).
  const std::vector<double>& grid() const { return grid_; }
  /// P evaluated on grid(), cached at construction.
  const std::vector<double>& grid_values() const { return values_; }
  /// Finer grid refined until the linear interpolant integrates P to ~1e-7
  /// relative accuracy; used for product integration of oscillatory kernels.
  const std::vector<double>& fourier_grid() const { return fgrid_; }
  const std::vector<double>& fourier_values() const { return fvalues_; }

 private:
  std::function<double(double)> eval_;
  std::function<double(double)> deriv_;
  Interval support_{0.0, 0.0};
  double integral_ = 0.0;
  double peak_k_ = 0.0;
  double peak_value_ = 0.0;
  double threshold_ = 0.0;
  bool zero_ = true;
  std::vector<double> grid_;
  std::vector<double> values_;      // P on grid_
  std::vector<double> cumulative_;  // cumulative integral on grid_
  std::vector<double> fgrid_;       // refined grid for oscillatory transforms
  std::vector<double> fvalues_;     // P on fgrid_

  void finalize();  // fills integral, grid, cumulative
};

/// P'(k') = k0^3 P(k0 k'): unit-carrier rescaling; the stability verdict is
/// invariant under it.
Spectrum rescale_unit_carrier(const Spectrum& s, double k0);

enum class PeriodKind { Tz, Tp };

struct SeaState {
  double hs = 0.0;  // significant wave height [m]
  double t = 0.0;   // characteristic period [s]
  PeriodKind kind = PeriodKind::Tz;
  double count = 0.0;  // occurrences per 100000

  void validate() const;
};

struct FitConfig {
  std::string practice = "dnv";  // only the DNV-style Tp/sqrt(Hs) rule is built in
  double g = 9.81;
};

struct FitResult {
  double gamma = 1.0;
  double alpha = 0.0;
  bool outside_validity = false;  // period/height combo outside the practice range
  std::string practice;
};

/// Sea state -> (gamma, alpha) under the configured fitting practice.
FitResult fit_sea_state(const SeaState& s, const FitConfig& cfg = {});

}  // namespace alber
