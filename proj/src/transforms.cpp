#include "alber/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace alber {

namespace {

// Integral of 1/(z - t) over t in [a, b] for z off [a, b]: the image segment
// z - t stays in a half-plane whenever im(z) != 0 or z is real outside [a,b],
// so the principal-branch difference of logs is the correct antiderivative.
cplx cauchy_mass(cplx z, double a, double b) { return std::log(z - a) - std::log(z - b); }

double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

}  // namespace

cplx hilbert_at(const CompactFunction& fc, cplx z, const QuadConfig& cfg) {
  const Interval sup = fc.support;
  if (!(sup.hi > sup.lo)) return {0.0, 0.0};
  auto f = [&fc, sup](double t) { return sup.contains(t) ? fc.f(t) : 0.0; };

  const double x0 = z.real();
  const double eta = z.imag();
  const double w = cfg.pv_window;
  const bool near_axis = std::abs(eta) <= w;
  const bool near_support = x0 > sup.lo - w && x0 < sup.hi + w;

  cplx total{0.0, 0.0};
  if (near_axis && near_support) {
    // Odd-part subtraction on the symmetric window [x0-w, x0+w]; the
    // subtracted Cauchy mass has a closed form (0 for the real PV).
    const double f0 = f(x0);
    auto g = [&f, f0, z](double t) { return (f(t) - f0) / (z - t); };
    const double scale = std::max(std::abs(eta), 1e-6 * w);
    total += gl_graded(g, x0 - w, x0 + w, x0, scale, cfg);
    if (eta == 0.0) {
      // PV of 1/(x0 - t) over the symmetric window vanishes.
    } else {
      total += f0 * cauchy_mass(z, x0 - w, x0 + w);
    }
    // Remaining smooth pieces outside the window.
    auto h = [&f, z](double t) { return f(t) / (z - t); };
    if (sup.lo < x0 - w) total += gl_graded(h, sup.lo, x0 - w, x0, w, cfg);
    if (sup.hi > x0 + w) total += gl_graded(h, x0 + w, sup.hi, x0, w, cfg);
  } else {
    auto h = [&f, z](double t) { return f(t) / (z - t); };
    const double scale = std::max(std::abs(eta), 1e-3);
    total = gl_graded(h, sup.lo, sup.hi, clamp(x0, sup.lo, sup.hi), scale, cfg);
  }
  return total / pi;
}

cplx signal_transform(const CompactFunction& f, double x, const QuadConfig& cfg) {
  const double fx = f.support.contains(x) ? f.f(x) : 0.0;
  return hilbert_at(f, cplx{x, 0.0}, cfg) + cplx{0.0, fx};
}

HilbertTable::HilbertTable(std::vector<double> nodes, std::vector<double> values)
    : u_(std::move(nodes)), v_(std::move(values)) {
  if (u_.size() != v_.size() || u_.size() < 2)
    throw ConfigError("HilbertTable: need matching node/value arrays of size >= 2");
  for (std::size_t i = 1; i < u_.size(); ++i)
    if (!(u_[i] > u_[i - 1])) throw ConfigError("HilbertTable: nodes must be strictly increasing");
  for (std::size_t i = 1; i < u_.size(); ++i)
    integral_ += 0.5 * (v_[i] + v_[i - 1]) * (u_[i] - u_[i - 1]);
  for (double v : v_) sup_abs_ = std::max(sup_abs_, std::abs(v));
}

HilbertTable::HilbertTable(const CompactFunction& f, int n_core, int n_tail) {
  const Interval s = f.support;
  if (!(s.hi > s.lo)) throw ConfigError("HilbertTable: empty support");
  const double w = s.width();
  std::vector<double> nodes = graded_grid(s.lo - 0.05 * w, s.hi + 0.05 * w, s.lo, s.hi, n_core, n_tail);
  std::vector<double> vals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    vals[i] = s.contains(nodes[i]) ? f.f(nodes[i]) : 0.0;
  *this = HilbertTable(std::move(nodes), std::move(vals));
}

cplx HilbertTable::operator()(cplx z) const {
  // Sum over linear panels; each Cauchy integral is exact:
  //   int (f_j + m (t-u_j)) / (z-t) dt = f_j L + m ((z-u_j) L - h_j),
  //   L = log(z-u_j) - log(z-u_{j+1}).
  cplx total{0.0, 0.0};
  cplx log_prev = std::log(z - u_[0]);
  for (std::size_t j = 0; j + 1 < u_.size(); ++j) {
    const cplx log_next = std::log(z - u_[j + 1]);
    const cplx L = log_prev - log_next;
    const double h = u_[j + 1] - u_[j];
    const double m = (v_[j + 1] - v_[j]) / h;
    total += v_[j] * L + m * ((z - u_[j]) * L - h);
    log_prev = log_next;
  }
  return total / pi;
}

cplx HilbertTable::deriv(cplx z) const {
  cplx total{0.0, 0.0};
  cplx log_prev = std::log(z - u_[0]);
  cplx inv_prev = 1.0 / (z - u_[0]);
  for (std::size_t j = 0; j + 1 < u_.size(); ++j) {
    const cplx log_next = std::log(z - u_[j + 1]);
    const cplx inv_next = 1.0 / (z - u_[j + 1]);
    const cplx L = log_prev - log_next;
    const double h = u_[j + 1] - u_[j];
    const double m = (v_[j + 1] - v_[j]) / h;
    // d/dz [f_j L + m((z-u_j)L - h)] = f_j L' + m (L + (z-u_j) L'),  L' = 1/(z-u_j) - 1/(z-u_{j+1}).
    const cplx Lp = inv_prev - inv_next;
    total += v_[j] * Lp + m * (L + (z - u_[j]) * Lp);
    log_prev = log_next;
    inv_prev = inv_next;
  }
  return total / pi;
}

cplx h_tilde(const Spectrum& P, const PhysicalParams& par, double X, cplx omega,
             const QuadConfig& cfg) {
  if (X == 0.0 || P.is_zero()) return {0.0, 0.0};
  par.validate();
  // z = omega / (4 pi^2 i p X) = -i omega / (4 pi^2 p X).
  const double c = 4.0 * pi * pi * par.p * X;
  const cplx z = cplx{0.0, -1.0} * omega / c;
  CompactFunction dxp{[&P, X](double k) { return P.dxp(X, k); }, P.dxp_support(X)};
  cplx H;
  if (z.imag() == 0.0) {
    // re(omega) = 0: Plemelj boundary value approached from re(omega) > 0,
    // i.e. from im(z) < 0 when p X > 0 and from above otherwise.
    const double side = (c > 0.0) ? 1.0 : -1.0;
    const double x = z.real();
    const double fx = dxp.support.contains(x) ? dxp.f(x) : 0.0;
    H = hilbert_at(dxp, cplx{x, 0.0}, cfg) + cplx{0.0, side * fx};
  } else {
    H = hilbert_at(dxp, z, cfg);
  }
  return par.q / (4.0 * pi * par.p) * H;
}

namespace {

// A(x) = int_0^1 e^{ixu} du, B(x) = int_0^1 u e^{ixu} du, series-stabilized.
void phi_pair(double x, cplx& A, cplx& B) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    A = cplx{1.0 - x2 / 6.0 + x2 * x2 / 120.0, x / 2.0 - x2 * x / 24.0};
    B = cplx{0.5 - x2 / 8.0 + x2 * x2 / 144.0, x / 3.0 - x2 * x / 30.0};
  } else {
    const cplx ix{0.0, x};
    const cplx eix = std::exp(ix);
    A = (eix - 1.0) / ix;
    B = (eix - A) / ix;
  }
}

}  // namespace

cplx p_check(const Spectrum& P, double y, double abs_tol, const QuadConfig&) {
  if (P.is_zero()) return {0.0, 0.0};
  if (y == 0.0) return {P.integral(), 0.0};
  if (y < 0.0) return std::conj(p_check(P, -y, abs_tol, {}));
  if (abs_tol <= 0.0) abs_tol = 1e-9 * std::max(1.0, P.integral());

  // Product integration of e^{2 pi i k y} against the cached linear
  // interpolant of P: each panel integral is closed-form, so the error is
  // O(h^2 P'') uniformly in y. The far tail is cut where a single
  // integration by parts bounds the remainder by P(K) / (pi y).
  const auto& g = P.fourier_grid();
  const auto& v = P.fourier_values();
  std::size_t i_hi = g.size() - 1;
  const double tail_level = pi * y * abs_tol;
  while (i_hi > 1 && v[i_hi] <= tail_level && g[i_hi] > P.peak_k()) --i_hi;
  std::size_t i_lo = 0;
  while (i_lo + 1 < i_hi && v[i_lo] <= tail_level && g[i_lo] < P.peak_k()) ++i_lo;

  const double w = 2.0 * pi * y;
  cplx total{0.0, 0.0};
  cplx E0 = std::exp(cplx{0.0, w * g[i_lo]});
  for (std::size_t j = i_lo; j < i_hi; ++j) {
    const double h = g[j + 1] - g[j];
    cplx A, B;
    phi_pair(w * h, A, B);
    const double m = (v[j + 1] - v[j]) / h;
    total += E0 * h * (v[j] * A + m * h * B);
    E0 *= std::exp(cplx{0.0, w * h});
  }
  return total;
}

FourierSamples inverse_fourier(const Spectrum& P, const std::vector<double>& y_nonneg,
                               const QuadConfig& cfg) {
  FourierSamples out;
  std::vector<double> ys = y_nonneg;
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  if (!ys.empty() && ys.front() < 0.0)
    throw ConfigError("inverse_fourier: sample arguments must be >= 0");
  std::vector<cplx> pos(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) pos[i] = p_check(P, ys[i], 0.0, cfg);
  for (std::size_t i = ys.size(); i-- > 0;) {
    if (ys[i] == 0.0) continue;
    out.y.push_back(-ys[i]);
    out.values.push_back(std::conj(pos[i]));
  }
  for (std::size_t i = 0; i < ys.size(); ++i) {
    out.y.push_back(ys[i]);
    out.values.push_back(pos[i]);
  }
  const double denom = std::max(P.integral(), 1e-300);
  for (const cplx& v : out.values)
    out.imag_residual = std::max(out.imag_residual, std::abs(v.imag()) / denom);
  return out;
}

KernelTable kernel_h(const Spectrum& P, const PhysicalParams& par, double X,
                     const std::vector<double>& t_grid, const QuadConfig& cfg) {
  par.validate();
  if (t_grid.empty() || t_grid.front() != 0.0)
    throw ConfigError("kernel_h: time grid must start at t = 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw ConfigError("kernel_h: time grid must be increasing");
  KernelTable out;
  out.X = X;
  out.times = t_grid;
  out.values.resize(t_grid.size());
  out.p_check.resize(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    const cplx pc = (X == 0.0) ? cplx{P.is_zero() ? 0.0 : P.integral(), 0.0}
                               : p_check(P, 2.0 * pi * par.p * X * t, 0.0, cfg);
    out.p_check[i] = pc;
    out.values[i] = 2.0 * par.q * std::sin(2.0 * pi * pi * par.p * X * X * t) * pc;
  }
  out.values.front() = {0.0, 0.0};  // sin(0) = 0 exactly
  return out;
}

}  // namespace alber
