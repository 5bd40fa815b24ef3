#include "alber/stability.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "alber/quadrature.hpp"

namespace alber {

namespace {

// Nodes and values of D_X P sampled where P itself is sampled (both shifted
// copies), so the linear interpolant resolves every feature of the quotient.
HilbertTable make_dxp_table(const Spectrum& P, double X) {
  const auto& g = P.grid();
  std::vector<double> nodes;
  if (X == 0.0) {
    nodes = g;
  } else {
    nodes.reserve(2 * g.size());
    for (double k : g) nodes.push_back(k - X / 2.0);
    for (double k : g) nodes.push_back(k + X / 2.0);
    std::sort(nodes.begin(), nodes.end());
    const double tol = 1e-12 * (nodes.back() - nodes.front());
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [tol](double a, double b) { return b - a < tol; }),
                nodes.end());
  }
  std::vector<double> vals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = P.dxp(X, nodes[i]);
  return HilbertTable(std::move(nodes), std::move(vals));
}

// Frozen smallness bound: sup_t |H[u](t - i eta)| <= C ||u||_{H1} (discrete
// trapezoid norm on the table nodes).
double h1_bound(const HilbertTable& tab, double c) {
  const auto& u = tab.nodes();
  const auto& v = tab.values();
  double l2 = 0.0, d2 = 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    const double h = u[i] - u[i - 1];
    l2 += 0.5 * (v[i] * v[i] + v[i - 1] * v[i - 1]) * h;
    const double s = (v[i] - v[i - 1]) / h;
    d2 += s * s * h;
  }
  return c * std::sqrt(l2 + d2);
}

double eta_side(const PhysicalParams& par, double X) {
  // Boundary limit side: from below the real axis (z = t - i eta) when
  // p X >= 0, from above when p X < 0; the X = 0 trace uses the lower side.
  return (par.p * X >= 0.0) ? 1.0 : -1.0;
}

double segment_distance(cplx a, cplx b, cplx p) {
  const cplx d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p - a) * std::conj(d)).real() / len2;
  t = std::min(1.0, std::max(0.0, t));
  return std::abs(p - (a + t * d));
}

struct Tracer {
  const HilbertTable& tab;
  cplx offset;  // -i * side * tol

  cplx operator()(double t) const { return tab(cplx{t, 0.0} + offset); }
};

// Adaptive curve trace: graded base grid over the core region (where the
// mass of D_X P lives), extended until the endpoints are small, then midpoint
// subdivision where the polygon is coarse. Far from the target coarse chords
// are harmless, so the subdivision threshold scales with the segment's
// distance to the target; near the target it bottoms out at a fixed fraction
// of |target| so the winding and the margin stay resolved.
ContourCurve trace_curve(const HilbertTable& tab, double X, Interval core,
                         const PhysicalParams& par, const StabilityConfig& cfg) {
  const double atarget = std::abs(par.target());
  const cplx target{par.target(), 0.0};
  const double side = eta_side(par, X);
  const Tracer tr{tab, cplx{0.0, -side * cfg.plemelj_tol}};

  const double endpoint_tol = cfg.endpoint_frac * atarget;
  double t_lo = core.lo - cfg.t_margin;
  double t_hi = core.hi + cfg.t_margin;
  double grow = std::max(1.0, 0.25 * core.width());
  for (int i = 0; i < 64 && std::abs(tr(t_lo)) > endpoint_tol; ++i, grow *= 2.0) t_lo -= grow;
  grow = std::max(1.0, 0.25 * core.width());
  for (int i = 0; i < 64 && std::abs(tr(t_hi)) > endpoint_tol; ++i, grow *= 2.0) t_hi += grow;

  std::vector<double> ts = graded_grid(t_lo, t_hi, core.lo, core.hi, cfg.curve_core, cfg.curve_tail);
  std::vector<cplx> ps(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) ps[i] = tr(ts[i]);

  const double seg_floor = atarget / 40.0;
  auto need_split = [&](const cplx& a, const cplx& b) {
    const double len = std::abs(b - a);
    return len > std::max(seg_floor, 0.3 * segment_distance(a, b, target));
  };
  bool changed = true;
  while (changed && static_cast<int>(ts.size()) < cfg.max_curve_nodes) {
    changed = false;
    std::vector<double> nts;
    std::vector<cplx> nps;
    nts.reserve(ts.size() * 2);
    nps.reserve(ts.size() * 2);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i > 0 && ts[i] - ts[i - 1] > 1e-10 && need_split(ps[i - 1], ps[i]) &&
          static_cast<int>(ts.size() + nts.size() - i) < cfg.max_curve_nodes) {
        const double tm = 0.5 * (ts[i] + ts[i - 1]);
        nts.push_back(tm);
        nps.push_back(tr(tm));
        changed = true;
      }
      nts.push_back(ts[i]);
      nps.push_back(ps[i]);
    }
    ts.swap(nts);
    ps.swap(nps);
  }

  ContourCurve out;
  out.X = X;
  out.t_nodes = std::move(ts);
  out.points.reserve(ps.size() + 2);
  out.points.push_back({0.0, 0.0});
  out.points.insert(out.points.end(), ps.begin(), ps.end());
  out.points.push_back({0.0, 0.0});
  out.closed = true;
  return out;
}

std::vector<double> positive_x_grid(const std::vector<double>& x_grid, const StabilityConfig& cfg) {
  std::vector<double> xs;
  if (x_grid.empty()) {
    for (double x = 0.0; x <= cfg.x_max + 0.5 * cfg.x_step; x += cfg.x_step) xs.push_back(x);
  } else {
    for (double x : x_grid) xs.push_back(std::abs(x));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  }
  return xs;
}

}  // namespace

double ContourCurve::sup_abs() const {
  double m = 0.0;
  for (const cplx& p : points) m = std::max(m, std::abs(p));
  return m;
}

double ContourCurve::re_min() const {
  double m = 0.0;
  for (const cplx& p : points) m = std::min(m, p.real());
  return m;
}

double ContourCurve::re_max() const {
  double m = 0.0;
  for (const cplx& p : points) m = std::max(m, p.real());
  return m;
}

int winding_number(const std::vector<cplx>& polygon, cplx target) {
  int w = 0;
  const double x = target.real(), y = target.imag();
  for (std::size_t i = 0; i + 1 < polygon.size(); ++i) {
    const cplx a = polygon[i], b = polygon[i + 1];
    const bool below_a = a.imag() <= y, below_b = b.imag() <= y;
    if (below_a == below_b) continue;
    const double xc = a.real() + (y - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
    if (xc > x) w += below_a ? 1 : -1;
  }
  return w;
}

PointLocation winding_contains(const ContourCurve& curve, cplx target, double on_tol) {
  const auto& pts = curve.points;
  if (pts.empty()) return PointLocation::outside;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (segment_distance(pts[i], pts[i + 1], target) < on_tol) return PointLocation::on_curve;
  if (pts.size() == 1 || std::abs(pts.front() - pts.back()) > 0.0) {
    // Treat an unclosed trace as closed through its endpoints.
  }
  if (std::abs(pts.front() - target) < on_tol) return PointLocation::on_curve;
  return winding_number(pts, target) != 0 ? PointLocation::inside : PointLocation::outside;
}

ContourCurve gamma_curve(const Spectrum& P, const PhysicalParams& par, double X,
                         const std::vector<double>& t_grid, double tol,
                         const StabilityConfig& cfg) {
  par.validate();
  if (!(tol > 0.0)) throw ConfigError("gamma_curve: tol must be > 0");
  ContourCurve out;
  out.X = X;
  if (P.is_zero()) {
    out.points = {{0.0, 0.0}};
    out.closed = true;
    return out;
  }
  if (t_grid.size() < 2) throw ConfigError("gamma_curve: t grid needs at least 2 nodes");
  HilbertTable tab = make_dxp_table(P, X);
  const Tracer tr{tab, cplx{0.0, -eta_side(par, X) * tol}};
  std::vector<cplx> ps(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) ps[i] = tr(t_grid[i]);
  const double endpoint_tol = cfg.endpoint_frac * std::abs(par.target());
  if (std::abs(ps.front()) > endpoint_tol || std::abs(ps.back()) > endpoint_tol)
    throw NumericalError("gamma_curve: t-range too small (endpoint magnitude above tolerance)");
  out.t_nodes = t_grid;
  out.points.reserve(ps.size() + 2);
  out.points.push_back({0.0, 0.0});
  out.points.insert(out.points.end(), ps.begin(), ps.end());
  out.points.push_back({0.0, 0.0});
  out.closed = true;
  return out;
}

StabilityVerdict is_unstable(const Spectrum& P, const PhysicalParams& par,
                             const std::vector<double>& x_grid, const StabilityConfig& cfg) {
  par.validate();
  StabilityVerdict v;
  v.target = par.target();
  if (P.is_zero()) {
    v.kappa_estimate = 1.0;
    return v;
  }
  const double atarget = std::abs(v.target);
  const cplx target{v.target, 0.0};

  std::vector<double> xs = positive_x_grid(x_grid, cfg);
  const bool auto_grow = x_grid.empty();

  struct Cell {
    XWitness w;
    double kappa = 1.0;
    bool unstable = false;
    ContourCurve curve;  // retained only when an observer is installed
  };
  std::vector<Cell> cells;

  std::size_t done = 0;
  while (true) {
    const std::size_t n_new = xs.size() - done;
    std::vector<Cell> batch(n_new);
    parallel_for(n_new, cfg.workers, [&](std::size_t j) {
      const double X = xs[done + j];
      Cell& c = batch[j];
      c.w.X = X;
      HilbertTable tab = make_dxp_table(P, X);
      const double bound = h1_bound(tab, cfg.smallness_c);
      if (bound < cfg.skip_fraction * atarget) {
        c.w.traced = false;
        c.w.sup_abs = bound;
        c.w.re_min = -bound;
        c.w.re_max = bound;
        c.kappa = std::max(0.0, 1.0 - bound / atarget);
        return;
      }
      ContourCurve curve = trace_curve(tab, X, P.effective_support(1e-3).inflated(0.5 * X), par, cfg);
      c.w.traced = true;
      c.w.sup_abs = curve.sup_abs();
      c.w.re_min = curve.re_min();
      c.w.re_max = curve.re_max();
      const PointLocation loc = winding_contains(curve, target, cfg.on_tol);
      c.w.winding = winding_number(curve.points, target);
      c.w.on_curve = (loc == PointLocation::on_curve);
      c.unstable = (loc != PointLocation::outside);
      for (const cplx& p : curve.points) c.kappa = std::min(c.kappa, std::abs(1.0 - p / target));
      if (cfg.observer) c.curve = std::move(curve);
    });
    for (auto& c : batch) cells.push_back(std::move(c));
    done = xs.size();

    if (!auto_grow) break;
    // Grow M until the trailing curves are safely small (they then cannot
    // reach, let alone enclose, the target).
    double edge_sup = 0.0;
    for (std::size_t i = cells.size() >= 3 ? cells.size() - 3 : 0; i < cells.size(); ++i)
      edge_sup = std::max(edge_sup, cells[i].w.sup_abs);
    if (edge_sup < 0.5 * atarget) break;
    const double m_old = xs.back();
    const double m_new = std::max(m_old * 1.5, m_old + cfg.x_step);
    if (m_new > cfg.x_max_cap)
      throw NumericalError("is_unstable: X scan exceeded the hard cap of " +
                           std::to_string(cfg.x_max_cap) + " without the curves shrinking");
    for (double x = m_old + cfg.x_step; x <= m_new + 0.5 * cfg.x_step; x += cfg.x_step)
      xs.push_back(x);
  }

  v.x_max = xs.back();
  for (const auto& c : cells) {
    v.witnesses.push_back(c.w);
    v.kappa_estimate = std::min(v.kappa_estimate, c.kappa);
    if (cfg.observer && c.w.traced) cfg.observer(c.curve);
  }

  // Merge unstable X probes into intervals and mirror them to X < 0.
  std::vector<Interval> pos;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].unstable) continue;
    const double x = cells[i].w.X;
    const double gap = (i > 0 ? xs[i] - xs[i - 1] : cfg.x_step) * 1.5;
    if (!pos.empty() && x - pos.back().hi <= gap)
      pos.back().hi = x;
    else
      pos.push_back({x, x});
  }
  for (const Interval& in : pos) {
    if (in.lo == 0.0) {
      v.unstable_X.push_back({-in.hi, in.hi});
    } else {
      v.unstable_X.push_back({-in.hi, -in.lo});
      v.unstable_X.push_back(in);
    }
  }
  std::sort(v.unstable_X.begin(), v.unstable_X.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  v.unstable = !v.unstable_X.empty();
  if (cells.size() >= 2) v.near_zero_flip = (cells[0].unstable != cells[1].unstable);
  return v;
}

SufficientVerdict sufficient_stable(const Spectrum& P, const PhysicalParams& par,
                                    const StabilityConfig& cfg) {
  par.validate();
  if (P.is_zero()) return SufficientVerdict::stable;
  const double target = par.target();

  std::vector<double> xs = positive_x_grid({}, cfg);
  std::size_t done = 0;
  std::vector<char> ok;
  std::vector<double> sup_bound;
  while (true) {
    const std::size_t n_new = xs.size() - done;
    std::vector<char> batch(n_new, 1);
    std::vector<double> bbound(n_new, 0.0);
    parallel_for(n_new, cfg.workers, [&](std::size_t j) {
      const double X = xs[done + j];
      HilbertTable tab = make_dxp_table(P, X);
      const double bound = h1_bound(tab, cfg.smallness_c);
      bbound[j] = bound;
      if (bound < target) return;  // every H value is below the target here
      CompactFunction dxp{[&P, X](double k) { return P.dxp(X, k); }, P.dxp_support(X)};
      // Quasi-critical points: sign changes of D_X P between table nodes.
      const auto& u = tab.nodes();
      const auto& w = tab.values();
      const double tiny = 1e-14 * tab.sup_abs();
      for (std::size_t i = 1; i < u.size(); ++i) {
        const bool change = (w[i - 1] > tiny && w[i] < -tiny) || (w[i - 1] < -tiny && w[i] > tiny);
        const bool flat_zero = std::abs(w[i]) <= tiny && std::abs(w[i - 1]) > tiny;
        if (!change && !flat_zero) continue;
        double a = u[i - 1], b = u[i];
        if (change) {
          for (int it = 0; it < 100; ++it) {
            const double m = 0.5 * (a + b);
            if ((dxp.f(a) > 0) == (dxp.f(m) > 0))
              a = m;
            else
              b = m;
          }
        }
        const double t_star = 0.5 * (a + b);
        const double hval = hilbert_at(dxp, cplx{t_star, 0.0}).real();
        if (!(hval < target)) {
          batch[j] = 0;
          return;
        }
      }
    });
    ok.insert(ok.end(), batch.begin(), batch.end());
    sup_bound.insert(sup_bound.end(), bbound.begin(), bbound.end());
    done = xs.size();
    double edge = 0.0;
    for (std::size_t i = sup_bound.size() >= 3 ? sup_bound.size() - 3 : 0; i < sup_bound.size(); ++i)
      edge = std::max(edge, sup_bound[i]);
    if (edge < target) break;
    const double m_old = xs.back();
    const double m_new = m_old * 1.5;
    if (m_new > cfg.x_max_cap) break;  // give up extending; remaining X unchecked -> inconclusive
    for (double x = m_old + cfg.x_step; x <= m_new + 0.5 * cfg.x_step; x += cfg.x_step)
      xs.push_back(x);
  }
  for (char c : ok)
    if (!c) return SufficientVerdict::inconclusive;
  if (!sup_bound.empty() && sup_bound.back() >= target) return SufficientVerdict::inconclusive;
  return SufficientVerdict::stable;
}

double kappa_estimate(const Spectrum& P, const PhysicalParams& par,
                      const std::vector<double>& x_grid, const std::vector<double>& s_grid,
                      const StabilityConfig& cfg) {
  par.validate();
  if (P.is_zero()) return 1.0;
  const cplx target{par.target(), 0.0};

  std::vector<double> xs = positive_x_grid(x_grid, cfg);
  std::vector<double> ss = s_grid;
  if (ss.empty()) {
    const Interval sup = P.support().inflated(0.5 * xs.back() + 2.0);
    ss = graded_grid(sup.lo, sup.hi, P.support().lo, P.support().hi, 201, 24);
  }
  std::sort(ss.begin(), ss.end());

  // Global pass: one table per X, all s values.
  double best = 1.0, bx = xs.front(), bs = ss.front();
  std::vector<double> col(ss.size());
  for (double X : xs) {
    HilbertTable tab = make_dxp_table(P, X);
    const cplx off{0.0, -eta_side(par, X) * cfg.plemelj_tol};
    for (double s : ss) {
      const double k = std::abs(1.0 - tab(cplx{s, 0.0} + off) / target);
      if (k < best) {
        best = k;
        bx = X;
        bs = s;
      }
    }
  }
  // The closure point 0 contributes |1 - 0| = 1.
  best = std::min(best, 1.0);

  // Local grid-halving refinement around the minimizer.
  double dx = xs.size() > 1 ? xs[1] - xs[0] : 0.02;
  double ds = ss.size() > 1 ? ss[1] - ss[0] : 0.02;
  for (int it = 0; it < 24; ++it) {
    dx *= 0.5;
    ds *= 0.5;
    double nbest = best, nx = bx, ns = bs;
    for (int i = -2; i <= 2; ++i) {
      const double X = std::max(0.0, bx + i * dx);
      HilbertTable tab = make_dxp_table(P, X);
      const cplx off{0.0, -eta_side(par, X) * cfg.plemelj_tol};
      for (int j = -2; j <= 2; ++j) {
        const double s = bs + j * ds;
        const double k = std::abs(1.0 - tab(cplx{s, 0.0} + off) / target);
        if (k < nbest) {
          nbest = k;
          nx = X;
          ns = s;
        }
      }
    }
    const double change = best - nbest;
    bx = nx;
    bs = ns;
    best = nbest;
    if (change <= 1e-3 * std::max(best, 1e-12)) break;
  }
  return best;
}

EigenWitness eigenvalue_crosscheck(const Spectrum& P, const PhysicalParams& par,
                                   const StabilityVerdict& verdict, const StabilityConfig& cfg) {
  par.validate();
  EigenWitness out;
  if (!verdict.unstable) {
    out.diagnostic = "no unstable region to certify";
    return out;
  }
  const cplx target{verdict.target, 0.0};

  // Candidate X values: interior points of the positive unstable intervals.
  std::vector<double> seeds_x;
  for (const Interval& in : verdict.unstable_X) {
    if (in.hi <= 0.0) continue;
    const double lo = std::max(in.lo, 0.0);
    seeds_x.push_back(0.5 * (lo + in.hi));
    seeds_x.push_back(lo + 0.25 * (in.hi - lo));
    seeds_x.push_back(lo + 0.75 * (in.hi - lo));
  }
  if (seeds_x.empty()) {
    out.diagnostic = "unstable intervals degenerate";
    return out;
  }

  for (double X : seeds_x) {
    if (X == 0.0) continue;
    HilbertTable tab = make_dxp_table(P, X);
    const double side = eta_side(par, X);  // im(Omega) must have sign -side

    // Seed from the trace: t minimizing |Gamma(t) - target|.
    const Interval fsup = P.dxp_support(X);
    const Interval core = P.effective_support(1e-3).inflated(0.5 * X);
    std::vector<double> ts = graded_grid(core.lo - 1.0, core.hi + 1.0, core.lo, core.hi, 513, 16);
    double t0 = ts.front();
    double dmin = 1e300;
    const cplx off{0.0, -side * cfg.plemelj_tol};
    for (double t : ts) {
      const double d = std::abs(tab(cplx{t, 0.0} + off) - target);
      if (d < dmin) {
        dmin = d;
        t0 = t;
      }
    }
    for (double depth : {32.0, 256.0, 4.0}) {
      cplx omega{t0, -side * depth * cfg.plemelj_tol};
      bool diverged = false;
      for (int it = 0; it < 80; ++it) {
        const cplx F = tab(omega) - target;
        if (std::abs(F) < 1e-13) break;
        const cplx dF = tab.deriv(omega);
        if (!(std::abs(dF) > 0.0)) {
          diverged = true;
          break;
        }
        const cplx step = F / dF;
        omega -= step;
        if (!std::isfinite(omega.real()) || !std::isfinite(omega.imag()) ||
            std::abs(omega) > 1e6) {
          diverged = true;
          break;
        }
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(omega))) break;
      }
      if (diverged) continue;
      if (!(side * (-omega.imag()) > 0.0)) continue;  // wrong half-plane

      // Polish against the accurate quadrature evaluator; Newton derivative
      // via H[u]'(z) = H[u'](z).
      CompactFunction dxp{[&P, X](double k) { return P.dxp(X, k); }, fsup};
      CompactFunction dxp_d{[&P, X](double k) {
                              return X == 0.0 ? 0.0
                                              : (P.derivative(k + X / 2.0) -
                                                 P.derivative(k - X / 2.0)) /
                                                    X;
                            },
                            fsup};
      for (int it = 0; it < 12; ++it) {
        const cplx F = hilbert_at(dxp, omega) - target;
        if (std::abs(F) < 1e-12) break;
        const cplx dF = hilbert_at(dxp_d, omega);
        if (!(std::abs(dF) > 0.0)) break;
        omega -= F / dF;
      }
      const double residual = std::abs(hilbert_at(dxp, omega) - target);
      if (residual < 1e-8 && side * (-omega.imag()) > 0.0) {
        out.found = true;
        out.X = X;
        out.Omega = omega;
        out.residual = residual;
        return out;
      }
    }
  }
  out.diagnostic = "Newton search did not converge to a valid half-plane witness";
  return out;
}

ScanResult scan_plane(const std::vector<double>& gammas, const std::vector<double>& alphas,
                      double k0, const PhysicalParams& par, const StabilityConfig& cfg) {
  if (gammas.empty() || alphas.empty()) throw ConfigError("scan_plane: empty grid");
  ScanResult res;
  res.gammas = gammas;
  res.alphas = alphas;
  res.cells.resize(gammas.size() * alphas.size());
  StabilityConfig cell_cfg = cfg;
  cell_cfg.workers = 1;
  cell_cfg.observer = nullptr;
  parallel_for(res.cells.size(), cfg.workers, [&](std::size_t idx) {
    ScanCell& cell = res.cells[idx];
    cell.gamma = gammas[idx / alphas.size()];
    cell.alpha = alphas[idx % alphas.size()];
    try {
      JonswapParams jp;
      jp.alpha = cell.alpha;
      jp.gamma = cell.gamma;
      jp.k0 = k0;
      const Spectrum P = Spectrum::jonswap(jp);
      const StabilityVerdict v = is_unstable(P, par, {}, cell_cfg);
      cell.status = v.unstable ? 1 : 0;
      cell.kappa = v.kappa_estimate;
      double lo = 0.0, hi = 0.0;
      for (const Interval& in : v.unstable_X) {
        if (in.hi <= 0.0) continue;
        if (hi == 0.0) lo = std::max(0.0, in.lo);
        hi = in.hi;
      }
      cell.bandwidth = {lo, hi};
    } catch (const std::exception& e) {
      cell.status = -1;
      cell.error = e.what();
    }
  });
  return res;
}

}  // namespace alber
