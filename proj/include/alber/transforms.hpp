#pragma once

#include <functional>
#include <vector>

#include "alber/common.hpp"
#include "alber/quadrature.hpp"
#include "alber/spectrum.hpp"

namespace alber {

/// A continuous function vanishing outside `support`; `f` must be evaluable
/// on all of R (callers may rely on it returning 0 outside the support).
struct CompactFunction {
  std::function<double(double)> f;
  Interval support{0.0, 0.0};
};

/// H[f](z) = (1/pi) integral of f(t)/(z - t) dt. For real z inside (or near)
/// the support the principal value is taken via the odd-part subtraction
/// f(t) -> f(t) - f(x0) on a symmetric window around x0 = re(z); the window's
/// Cauchy mass is added back in closed form (it is 0 for the real principal
/// value). Accurate uniformly down to |im z| = 0.
cplx hilbert_at(const CompactFunction& f, cplx z, const QuadConfig& cfg = {});

/// Boundary value of H[f] approached from below the real axis:
/// S[f](x) = lim_{eta->0+} H[f](x - i eta) = H[f](x) + i f(x).
cplx signal_transform(const CompactFunction& f, double x, const QuadConfig& cfg = {});

/// Product-integration evaluator for H[f] at many complex points: f is frozen
/// as a linear interpolant on fixed nodes and each panel's Cauchy integral is
/// exact (complex logarithms), so the error is O(h^2) independent of |im z|.
/// Intended for points off the real axis (e.g. the t - i*tol curve trace);
/// real z strictly outside the node range is also fine.
class HilbertTable {
 public:
  HilbertTable() = default;
  HilbertTable(std::vector<double> nodes, std::vector<double> values);
  /// Samples f on a graded grid of n_core + 2*n_tail nodes over its support.
  HilbertTable(const CompactFunction& f, int n_core = 2000, int n_tail = 200);

  cplx operator()(cplx z) const;
  cplx deriv(cplx z) const;  // d/dz H[f](z)

  const std::vector<double>& nodes() const { return u_; }
  const std::vector<double>& values() const { return v_; }
  double integral() const { return integral_; }  // trapezoid integral of f
  double sup_abs() const { return sup_abs_; }

 private:
  std::vector<double> u_, v_;
  double integral_ = 0.0;
  double sup_abs_ = 0.0;
};

/// Laplace-side symbol: for X != 0,
///   h_tilde(X, omega) = qi integral (P(k+X/2) - P(k-X/2)) / (omega - 4 pi^2 i p k X) dk
///                     = (q / 4 pi p) H[D_X P](omega / (4 pi^2 i p X)),
/// and exactly 0 for X = 0. For purely imaginary omega the Plemelj boundary
/// value from the re(omega) > 0 side is returned.
cplx h_tilde(const Spectrum& P, const PhysicalParams& par, double X, cplx omega,
             const QuadConfig& cfg = {});

/// Single-point inverse Fourier value p_check(y) = integral e^{2 pi i k y} P(k) dk
/// by direct oscillation-aware quadrature; abs_tol bounds the truncation error
/// from cutting the far tail of P.
cplx p_check(const Spectrum& P, double y, double abs_tol = 0.0, const QuadConfig& cfg = {});

/// p_check sampled on the symmetric grid {-y_i} U {y_i}; values at -y are
/// conj(values at y) exactly. imag_residual is max |im p_check| / p_check(0),
/// a diagnostic for how far P is from even.
struct FourierSamples {
  std::vector<double> y;
  std::vector<cplx> values;
  double imag_residual = 0.0;
};
FourierSamples inverse_fourier(const Spectrum& P, const std::vector<double>& y_nonneg,
                               const QuadConfig& cfg = {});

/// Time-domain Volterra kernel h(X,t) = 2q sin(2 pi^2 p X^2 t) p_check(2 pi p X t)
/// tabulated on t_grid (which must start at 0, so h(X,0) = 0 holds exactly).
/// Values are complex: p_check is complex whenever P is not even.
struct KernelTable {
  double X = 0.0;
  std::vector<double> times;
  std::vector<cplx> values;
  std::vector<cplx> p_check;  // p_check(2 pi p X t_i), the samples behind `values`
};
KernelTable kernel_h(const Spectrum& P, const PhysicalParams& par, double X,
                     const std::vector<double>& t_grid, const QuadConfig& cfg = {});

}  // namespace alber
