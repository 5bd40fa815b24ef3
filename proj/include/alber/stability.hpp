#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "alber/common.hpp"
#include "alber/spectrum.hpp"
#include "alber/transforms.hpp"

namespace alber {

/// Closed trace of Gamma_X(t) = H[D_X P](t - i*side*tol), the boundary curve
/// whose winding around the target 4*pi*p/q decides stability. The limit is
/// taken from below the real axis for p*X >= 0 and from above for p*X < 0
/// (the two traces are complex conjugates, so verdicts coincide).
struct ContourCurve {
  double X = 0.0;
  std::vector<double> t_nodes;
  std::vector<cplx> points;  // Gamma_X(t_i); 0 prepended/appended when closed
  bool closed = false;

  double sup_abs() const;
  double re_min() const;
  double re_max() const;
};

struct StabilityConfig {
  double plemelj_tol = 1e-4;  // eta in Gamma_X(t) ~ H[D_X P](t - i eta)
  double on_tol = 1e-6;       // on-curve band for winding classification
  double x_step = 0.02;
  double x_max = 2.0;         // initial half-width of the X scan, auto-grown
  double x_max_cap = 64.0;
  double endpoint_frac = 5e-3;  // endpoint tolerance as a fraction of |target|
  double t_margin = 1.0;        // initial inflation of supp(D_X P) for the t range
  int curve_core = 257;         // initial t nodes across the support
  int curve_tail = 32;          // initial t nodes per tail
  int max_curve_nodes = 6000;   // cap for adaptive segment subdivision
  double smallness_c = 2.0;     // frozen constant in sup|H[u]| <= C ||u||_H1
  double skip_fraction = 0.25;  // skip tracing when the H1 bound < this * |target|
  int workers = 1;
  std::function<void(const ContourCurve&)> observer;  // called per traced curve, in X order
};

enum class PointLocation { inside, outside, on_curve };

/// Winding-number classification of `target` against the closed polygon.
PointLocation winding_contains(const ContourCurve& curve, cplx target, double on_tol);

/// Signed winding number of the closed polygon around `target` (no on-curve band).
int winding_number(const std::vector<cplx>& polygon, cplx target);

/// Trace Gamma_X on the given t grid. Throws NumericalError("t-range too
/// small") if the endpoint magnitudes exceed endpoint_frac * |target|.
ContourCurve gamma_curve(const Spectrum& P, const PhysicalParams& par, double X,
                         const std::vector<double>& t_grid, double tol,
                         const StabilityConfig& cfg = {});

struct XWitness {
  double X = 0.0;
  int winding = 0;
  bool on_curve = false;
  double sup_abs = 0.0;    // sup |Gamma_X| over the trace (or its upper bound)
  bool traced = false;     // false when the smallness bound skipped the trace
  double re_min = 0.0, re_max = 0.0;
};

struct StabilityVerdict {
  bool unstable = false;
  double target = 0.0;
  double kappa_estimate = 1.0;
  std::vector<Interval> unstable_X;  // symmetric about 0
  std::vector<XWitness> witnesses;   // X >= 0 probes in scan order
  bool near_zero_flip = false;       // verdict differs between X=0 and the first step
  double x_max = 0.0;                // final scan half-width after auto-growth
};

/// Criterion (C): unstable iff the target is on or enclosed by some Gamma_X.
/// x_grid may be empty, in which case a symmetric grid with cfg.x_step is
/// built on [-M, M] and M grown until the curves at the edge are small.
StabilityVerdict is_unstable(const Spectrum& P, const PhysicalParams& par,
                             const std::vector<double>& x_grid, const StabilityConfig& cfg = {});

enum class SufficientVerdict { stable, inconclusive };

/// Sufficient condition: stable when every quasi-critical point t* (zero of
/// D_X P) satisfies H[D_X P](t*) < target, for all scanned X. Never returns
/// "unstable".
SufficientVerdict sufficient_stable(const Spectrum& P, const PhysicalParams& par,
                                    const StabilityConfig& cfg = {});

/// Margin estimate: min over the probe grid of |1 - H~(X, s)| with local
/// grid-halving refinement around the minimizer (relative change < 1e-3).
double kappa_estimate(const Spectrum& P, const PhysicalParams& par,
                      const std::vector<double>& x_grid, const std::vector<double>& s_grid,
                      const StabilityConfig& cfg = {});

struct EigenWitness {
  bool found = false;
  double X = 0.0;
  cplx Omega{0.0, 0.0};
  double residual = 0.0;
  std::string diagnostic;
};

/// Root search for H[D_X P](Omega) = target with Omega in the open half-plane
/// sign(p X) * im(Omega) < 0, seeded from the winding witness of `verdict`.
EigenWitness eigenvalue_crosscheck(const Spectrum& P, const PhysicalParams& par,
                                   const StabilityVerdict& verdict,
                                   const StabilityConfig& cfg = {});

struct ScanCell {
  double gamma = 0.0;
  double alpha = 0.0;
  int status = 0;  // 0 stable, 1 unstable, -1 error
  double kappa = 0.0;
  Interval bandwidth{0.0, 0.0};  // outermost unstable |X| interval, {0,0} if none
  std::string error;
};

struct ScanResult {
  std::vector<double> gammas, alphas;
  std::vector<ScanCell> cells;  // row-major: cells[ig * alphas.size() + ia]
};

/// Data-parallel map of is_unstable over a JONSWAP (gamma, alpha) grid;
/// per-cell failures are recorded and the scan continues.
ScanResult scan_plane(const std::vector<double>& gammas, const std::vector<double>& alphas,
                      double k0, const PhysicalParams& par, const StabilityConfig& cfg = {});

}  // namespace alber
