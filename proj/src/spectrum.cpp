#include "alber/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "alber/quadrature.hpp"

namespace alber {

namespace {

// Natural cubic spline on strictly increasing nodes.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    a_.assign(n, 0.0);
    if (n < 3) return;
    std::vector<double> h(n - 1), rhs(n, 0.0), diag(n, 2.0), sub(n, 0.0), sup(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      sub[i] = h[i - 1] / (h[i - 1] + h[i]);
      sup[i] = h[i] / (h[i - 1] + h[i]);
      rhs[i] = 6.0 / (h[i - 1] + h[i]) * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    }
    // Thomas algorithm, natural end conditions a_[0] = a_[n-1] = 0.
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double m = sub[i] / diag[i - 1];
      diag[i] -= m * sup[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      a_[i] = (rhs[i] - sup[i] * a_[i + 1]) / diag[i];
      if (i == 1) break;
    }
  }

  double eval(double t) const {
    const auto [i, u, h] = locate(t);
    const double A = (x_[i + 1] - t) / h, B = 1.0 - A;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * a_[i] + (B * B * B - B) * a_[i + 1]) * h * h / 6.0;
  }

  double deriv(double t) const {
    const auto [i, u, h] = locate(t);
    const double A = (x_[i + 1] - t) / h, B = 1.0 - A;
    return (y_[i + 1] - y_[i]) / h +
           ((3.0 * B * B - 1.0) * a_[i + 1] - (3.0 * A * A - 1.0) * a_[i]) * h / 6.0;
  }

 private:
  std::tuple<std::size_t, double, double> locate(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    return {i, t - x_[i], x_[i + 1] - x_[i]};
  }
  std::vector<double> x_, y_, a_;
};

double golden_max(const std::function<double(double)>& f, double a, double b) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return 0.5 * (a + b);
}

// Bisect for f(k) == level between bracket points (f(klo)-level and
// f(khi)-level of opposite sign).
double bisect_level(const std::function<double(double)>& f, double level, double klo, double khi) {
  double flo = f(klo) - level;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (klo + khi);
    const double fm = f(mid) - level;
    if ((fm > 0) == (flo > 0)) {
      klo = mid;
      flo = fm;
    } else {
      khi = mid;
    }
  }
  return 0.5 * (klo + khi);
}

}  // namespace

void JonswapParams::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("jonswap: alpha must be > 0");
  if (!(gamma >= 1.0)) throw ConfigError("jonswap: gamma must be >= 1");
  if (!(k0 > 0.0)) throw ConfigError("jonswap: k0 must be > 0");
  if (!(delta_low > 0.0) || !(delta_high > 0.0))
    throw ConfigError("jonswap: peak widths must be > 0");
}

double jonswap_eval(const JonswapParams& p, double k) {
  if (!(k > 0.0)) throw ConfigError("jonswap_eval: k must be > 0");
  const double r = k / p.k0;
  const double delta = (k <= p.k0) ? p.delta_low : p.delta_high;
  const double s = 1.0 - std::sqrt(r);
  const double peak = std::exp(-s * s / (2.0 * delta * delta));
  return p.alpha / (2.0 * k * k * k) * std::exp(-1.25 / (r * r)) * std::pow(p.gamma, peak);
}

double jonswap_deriv(const JonswapParams& p, double k) {
  if (!(k > 0.0)) throw ConfigError("jonswap_deriv: k must be > 0");
  const double r = k / p.k0;
  const double delta = (k <= p.k0) ? p.delta_low : p.delta_high;
  const double s = 1.0 - std::sqrt(r);
  const double peak = std::exp(-s * s / (2.0 * delta * delta));
  // d/dk of the peak-factor exponent; the delta switch multiplies a factor
  // that vanishes at k = k0, so the derivative is continuous there.
  const double dpeak = peak * s / (delta * delta) * 0.5 / std::sqrt(k * p.k0);
  const double logderiv = -3.0 / k + 2.5 * p.k0 * p.k0 / (k * k * k) + dpeak * std::log(p.gamma);
  return jonswap_eval(p, k) * logderiv;
}

double Spectrum::operator()(double k) const {
  if (zero_ || !support_.contains(k)) return 0.0;
  return std::max(0.0, eval_(k));
}

double Spectrum::derivative(double k) const {
  if (zero_ || !support_.contains(k)) return 0.0;
  return deriv_(k);
}

double Spectrum::dxp(double X, double k) const {
  if (X == 0.0) return derivative(k);
  return ((*this)(k + X / 2.0) - (*this)(k - X / 2.0)) / X;
}

void Spectrum::finalize() {
  // Reference grid: dense where the density is large, geometric tails.
  const double lo = support_.lo, hi = support_.hi;
  const double core_hi = std::min(hi, peak_k_ + 8.0 * std::max(1.0, peak_k_));
  const double core_lo = std::max(lo, peak_k_ - 8.0 * std::max(1.0, peak_k_));
  grid_ = graded_grid(lo, hi, core_lo, core_hi, 800, 120);
  values_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) values_[i] = (*this)(grid_[i]);
  cumulative_.assign(grid_.size(), 0.0);
  QuadConfig q;
  q.base_panels = 2;
  q.max_doublings = 6;
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    const double piece = gl_adaptive([this](double k) { return (*this)(k); }, grid_[i - 1], grid_[i], q);
    cumulative_[i] = cumulative_[i - 1] + piece;
  }
  integral_ = cumulative_.back();

  // Refined grid for product integration: subdivide until the linear
  // interpolant reproduces each panel integral to a small fraction of the
  // total mass.  Oscillatory transforms against this interpolant then carry
  // an absolute error of order budget * integral.
  fgrid_ = grid_;
  fvalues_ = values_;
  std::vector<double> pieces(cumulative_.size(), 0.0);
  for (std::size_t i = 1; i < cumulative_.size(); ++i) pieces[i] = cumulative_[i] - cumulative_[i - 1];
  const double budget = 4e-7 * std::max(integral_, peak_value_ * support_.width() * 1e-3);
  for (int pass = 0; pass < 14; ++pass) {
    double total_err = 0.0;
    for (std::size_t i = 1; i < fgrid_.size(); ++i) {
      const double trap = 0.5 * (fvalues_[i - 1] + fvalues_[i]) * (fgrid_[i] - fgrid_[i - 1]);
      total_err += std::abs(trap - pieces[i]);
    }
    if (total_err < budget || fgrid_.size() > 20000) break;
    const double seg_tol = budget / (2.0 * static_cast<double>(fgrid_.size()));
    std::vector<double> ng, nv, np;
    ng.reserve(2 * fgrid_.size());
    nv.reserve(2 * fgrid_.size());
    np.reserve(2 * fgrid_.size());
    ng.push_back(fgrid_[0]);
    nv.push_back(fvalues_[0]);
    np.push_back(0.0);
    for (std::size_t i = 1; i < fgrid_.size(); ++i) {
      const double trap = 0.5 * (fvalues_[i - 1] + fvalues_[i]) * (fgrid_[i] - fgrid_[i - 1]);
      if (std::abs(trap - pieces[i]) > seg_tol) {
        const double mid = 0.5 * (fgrid_[i - 1] + fgrid_[i]);
        const double left = gl_adaptive([this](double k) { return (*this)(k); }, fgrid_[i - 1], mid, q);
        ng.push_back(mid);
        nv.push_back((*this)(mid));
        np.push_back(left);
        ng.push_back(fgrid_[i]);
        nv.push_back(fvalues_[i]);
        np.push_back(pieces[i] - left);
      } else {
        ng.push_back(fgrid_[i]);
        nv.push_back(fvalues_[i]);
        np.push_back(pieces[i]);
      }
    }
    if (ng.size() == fgrid_.size()) break;
    fgrid_ = std::move(ng);
    fvalues_ = std::move(nv);
    pieces = std::move(np);
  }
}

Interval Spectrum::effective_support(double mass_frac) const {
  if (zero_) return {0.0, 0.0};
  const double cut = mass_frac * integral_;
  std::size_t i_lo = 0, i_hi = grid_.size() - 1;
  while (i_lo + 1 < grid_.size() && cumulative_[i_lo + 1] < cut) ++i_lo;
  while (i_hi > 0 && integral_ - cumulative_[i_hi - 1] < cut) --i_hi;
  return {grid_[i_lo], grid_[i_hi]};
}

Spectrum Spectrum::truncate_to_compact(std::function<double(double)> raw, Interval search,
                                       double threshold_fraction,
                                       std::function<double(double)> raw_deriv) {
  if (!(threshold_fraction > 0.0) || threshold_fraction > 1e-3)
    throw ConfigError("truncate_to_compact: threshold_fraction must be in (0, 1e-3]");
  // Locate the maximum on a log-spaced scan (densities of interest peak on a
  // multiplicative scale), then refine.
  const int nscan = 4000;
  double best_k = search.lo, best_v = -1.0;
  const bool logscan = search.lo > 0.0;
  for (int i = 0; i <= nscan; ++i) {
    const double u = static_cast<double>(i) / nscan;
    const double k = logscan ? search.lo * std::pow(search.hi / search.lo, u)
                             : search.lo + (search.hi - search.lo) * u;
    const double v = raw(k);
    if (v > best_v) {
      best_v = v;
      best_k = k;
    }
  }
  if (!(best_v > 0.0)) throw ConfigError("empty spectrum");
  const double dk = logscan ? best_k * 0.05 : (search.hi - search.lo) / nscan * 4.0;
  const double peak_k = golden_max(raw, std::max(search.lo, best_k - dk),
                                   std::min(search.hi, best_k + dk));
  const double peak_v = raw(peak_k);
  const double level = threshold_fraction * peak_v;

  // Bisection for the support endpoints where raw crosses the threshold.
  double lo = search.lo, hi = search.hi;
  if (raw(search.lo) < level) lo = bisect_level(raw, level, search.lo, peak_k);
  if (raw(search.hi) < level) hi = bisect_level(raw, level, search.hi, peak_k);

  Spectrum s;
  s.zero_ = false;
  s.eval_ = raw;
  if (raw_deriv) {
    s.deriv_ = std::move(raw_deriv);
  } else {
    auto f = raw;
    s.deriv_ = [f, lo, hi](double k) {
      const double h = std::max(1e-6, 1e-7 * (hi - lo));
      return (f(std::min(hi, k + h)) - f(std::max(lo, k - h))) /
             (std::min(hi, k + h) - std::max(lo, k - h));
    };
  }
  s.support_ = {lo, hi};
  s.peak_k_ = peak_k;
  s.peak_value_ = peak_v;
  s.threshold_ = threshold_fraction;
  s.finalize();
  return s;
}

Spectrum Spectrum::jonswap_raw(const JonswapParams& p, double threshold_fraction) {
  p.validate();
  auto f = [p](double k) { return k > 0.0 ? jonswap_eval(p, k) : 0.0; };
  auto df = [p](double k) { return k > 0.0 ? jonswap_deriv(p, k) : 0.0; };
  // The low side dies like exp(-5/4 (k0/k)^2); the high side like k^-3, so the
  // upper search bound must accommodate (1/threshold)^(1/3).
  const double hi = p.k0 * std::max(10.0, 2.0 * std::cbrt(1.0 / threshold_fraction));
  return truncate_to_compact(f, {p.k0 * 1e-3, hi}, threshold_fraction, df);
}

Spectrum Spectrum::jonswap(const JonswapParams& p, double threshold_fraction) {
  if (p.k0 == 1.0) return jonswap_raw(p, threshold_fraction);
  return rescale_unit_carrier(jonswap_raw(p, threshold_fraction), p.k0);
}

Spectrum Spectrum::from_samples(const std::vector<double>& k, const std::vector<double>& p,
                                double threshold_fraction) {
  if (k.size() != p.size() || k.size() < 4) throw ConfigError("tabulated spectrum: need >= 4 samples");
  for (std::size_t i = 1; i < k.size(); ++i)
    if (!(k[i] > k[i - 1])) throw ConfigError("tabulated spectrum: k must be strictly increasing");
  for (double v : p)
    if (v < 0.0 || !std::isfinite(v)) throw ConfigError("tabulated spectrum: P(k) must be finite and >= 0");
  auto spline = std::make_shared<CubicSpline>(k, p);
  const double klo = k.front(), khi = k.back();
  auto f = [spline, klo, khi](double x) {
    if (x < klo || x > khi) return 0.0;
    return std::max(0.0, spline->eval(x));
  };
  auto df = [spline, klo, khi](double x) {
    if (x < klo || x > khi) return 0.0;
    return spline->deriv(x);
  };
  return truncate_to_compact(f, {klo, khi}, threshold_fraction, df);
}

Spectrum Spectrum::load_table(const std::string& path, double threshold_fraction) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spectrum table: " + path);
  std::vector<double> k, p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a)) continue;  // blank/comment line
    if (!(ss >> b))
      throw ConfigError("spectrum table " + path + ": line " + std::to_string(lineno) +
                        ": expected two columns");
    k.push_back(a);
    p.push_back(b);
  }
  if (k.empty()) throw ConfigError("empty spectrum");
  bool any_positive = false;
  for (double v : p) any_positive = any_positive || v > 0.0;
  if (!any_positive) throw ConfigError("empty spectrum");
  return from_samples(k, p, threshold_fraction);
}

Spectrum rescale_unit_carrier(const Spectrum& s, double k0) {
  if (!(k0 > 0.0)) throw ConfigError("rescale_unit_carrier: k0 must be > 0");
  if (k0 == 1.0 || s.is_zero()) return s;
  auto base = std::make_shared<Spectrum>(s);
  const double c = k0 * k0 * k0;
  auto f = [base, k0, c](double k) { return c * (*base)(k0 * k); };
  auto df = [base, k0, c](double k) { return c * k0 * base->derivative(k0 * k); };
  Interval sup{s.support().lo / k0, s.support().hi / k0};
  // Support endpoints are exact images; bypass the threshold search.
  Spectrum out = Spectrum::truncate_to_compact(
      f, {sup.lo - 1e-12 * sup.width(), sup.hi + 1e-12 * sup.width()},
      s.threshold_fraction() > 0 ? s.threshold_fraction() : 1e-10, df);
  return out;
}

void SeaState::validate() const {
  if (!(hs > 0.0)) throw ConfigError("sea state: Hs must be > 0");
  if (!(t > 0.0)) throw ConfigError("sea state: period must be > 0");
  if (count < 0.0) throw ConfigError("sea state: count must be >= 0");
}

namespace {

double dnv_gamma(double tp, double hs) {
  const double r = tp / std::sqrt(hs);
  if (r <= 3.6) return 5.0;
  if (r >= 5.0) return 1.0;
  return std::exp(5.75 - 1.15 * r);
}

// Tz/Tp ratio as a function of gamma (DNV-style polynomial fit).
double tz_over_tp(double gamma) {
  return 0.6673 + 0.05037 * gamma - 0.006230 * gamma * gamma + 0.0003341 * gamma * gamma * gamma;
}

}  // namespace

FitResult fit_sea_state(const SeaState& s, const FitConfig& cfg) {
  s.validate();
  if (cfg.practice != "dnv") throw ConfigError("unknown fitting practice: " + cfg.practice);
  double tp = s.t;
  double gamma = 3.3;
  if (s.kind == PeriodKind::Tz) {
    for (int it = 0; it < 50; ++it) {
      tp = s.t / tz_over_tp(gamma);
      const double g2 = dnv_gamma(tp, s.hs);
      if (std::abs(g2 - gamma) < 1e-12) {
        gamma = g2;
        break;
      }
      gamma = g2;
    }
    tp = s.t / tz_over_tp(gamma);
  } else {
    gamma = dnv_gamma(tp, s.hs);
  }
  gamma = std::max(gamma, 1.0);
  const double wp = 2.0 * pi / tp;
  const double alpha =
      5.0 / 16.0 * s.hs * s.hs * std::pow(wp, 4) / (cfg.g * cfg.g) * (1.0 - 0.287 * std::log(gamma));
  const double r = tp / std::sqrt(s.hs);
  FitResult out;
  out.gamma = gamma;
  out.alpha = alpha;
  out.outside_validity = (r <= 3.6 || r >= 5.0);
  out.practice = cfg.practice;
  return out;
}

}  // namespace alber
