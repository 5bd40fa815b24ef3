#include "alber/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <sstream>

#include "alber/quadrature.hpp"

namespace alber {

namespace {

// Panel moments for product integration of e^{i x u} against a linear
// interpolant on [0,1]: A = int e^{ixu} du, B = int u e^{ixu} du / 1.
void phi_pair(double x, cplx& A, cplx& B) {
  if (std::abs(x) < 1e-3) {
    const cplx ix{0.0, x};
    A = 1.0 + ix * (1.0 / 2.0 + ix * (1.0 / 6.0 + ix / 24.0));
    B = 0.5 + ix * (1.0 / 3.0 + ix * (1.0 / 8.0 + ix / 30.0));
    return;
  }
  const cplx ix{0.0, x};
  const cplx e = std::exp(ix);
  A = (e - 1.0) / ix;
  B = (e - A) / ix;
}

// int e^{i w K} g(K) dK for the linear interpolant of (ks, vs).
cplx oscillatory_row(const std::vector<double>& ks, const std::vector<double>& vs, double w) {
  cplx total{0.0, 0.0};
  cplx E0 = std::exp(cplx{0.0, w * ks.front()});
  for (std::size_t j = 0; j + 1 < ks.size(); ++j) {
    const double h = ks[j + 1] - ks[j];
    cplx A, B;
    phi_pair(w * h, A, B);
    const double m = (vs[j + 1] - vs[j]) / h;
    total += E0 * h * (vs[j] * A + m * h * B);
    E0 *= std::exp(cplx{0.0, w * h});
  }
  return total;
}

std::size_t bracket(const std::vector<double>& g, double x) {
  auto it = std::upper_bound(g.begin(), g.end(), x);
  std::size_t i = static_cast<std::size_t>(it - g.begin());
  if (i == 0) i = 1;
  if (i >= g.size()) i = g.size() - 1;
  return i - 1;
}

double uniform_step(const std::vector<double>& t, const char* what) {
  if (t.size() < 2) throw ConfigError(std::string(what) + ": need at least two nodes");
  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) throw ConfigError(std::string(what) + ": grid must increase");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs(t[i] - t[i - 1] - dt) > 1e-9 * dt)
      throw ConfigError(std::string(what) + ": grid must be uniform");
  return dt;
}

double trap_l1(const std::vector<double>& wX, const std::vector<double>& wk, const cplx* slice,
               std::size_t nx, std::size_t nk) {
  double s = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nk; ++j) row += wk[j] * std::abs(slice[i * nk + j]);
    s += wX[i] * row;
  }
  return s;
}

}  // namespace

InitialData InitialData::gaussian(double amplitude, double sigma_x, double sigma_k) {
  if (!(sigma_x > 0.0) || !(sigma_k > 0.0))
    throw ConfigError("InitialData: gaussian widths must be positive");
  if (!std::isfinite(amplitude)) throw ConfigError("InitialData: amplitude must be finite");
  InitialData d;
  d.gaussian_ = true;
  d.amp_ = amplitude;
  d.sx_ = sigma_x;
  d.sk_ = sigma_k;
  d.zero_ = amplitude == 0.0;
  d.warned_ = std::make_shared<std::atomic<bool>>(false);
  return d;
}

InitialData InitialData::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("InitialData: cannot open '" + path + "'");
  struct Row {
    double X, K, v;
  };
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    Row r;
    if (!(ss >> r.X)) continue;  // blank
    std::string extra;
    if (!(ss >> r.K >> r.v) || (ss >> extra))
      throw ConfigError("InitialData: '" + path + "' line " + std::to_string(lineno) +
                        ": expected three columns");
    if (!std::isfinite(r.X) || !std::isfinite(r.K) || !std::isfinite(r.v))
      throw ConfigError("InitialData: '" + path + "' line " + std::to_string(lineno) +
                        ": non-finite entry");
    rows.push_back(r);
  }
  if (rows.size() < 4) throw ConfigError("InitialData: '" + path + "' has too few samples");

  InitialData d;
  for (const auto& r : rows) {
    d.Xs_.push_back(r.X);
    d.Ks_.push_back(r.K);
  }
  auto dedup = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedup(d.Xs_);
  dedup(d.Ks_);
  const std::size_t nX = d.Xs_.size(), nK = d.Ks_.size();
  if (nX < 2 || nK < 2 || nX * nK != rows.size())
    throw ConfigError("InitialData: '" + path + "' samples do not form a full rectangular grid");
  d.table_.assign(nX * nK, std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows) {
    const std::size_t iX =
        static_cast<std::size_t>(std::lower_bound(d.Xs_.begin(), d.Xs_.end(), r.X) - d.Xs_.begin());
    const std::size_t iK =
        static_cast<std::size_t>(std::lower_bound(d.Ks_.begin(), d.Ks_.end(), r.K) - d.Ks_.begin());
    if (!std::isnan(d.table_[iX * nK + iK]))
      throw ConfigError("InitialData: '" + path + "' has a duplicate grid point");
    d.table_[iX * nK + iK] = r.v;
  }
  d.zero_ = std::all_of(d.table_.begin(), d.table_.end(), [](double v) { return v == 0.0; });
  d.warned_ = std::make_shared<std::atomic<bool>>(false);
  return d;
}

InitialData InitialData::scaled(double factor) const {
  InitialData d = *this;
  if (gaussian_) {
    d.amp_ *= factor;
  } else {
    for (auto& v : d.table_) v *= factor;
  }
  d.zero_ = zero_ || factor == 0.0;
  d.warned_ = std::make_shared<std::atomic<bool>>(false);
  return d;
}

cplx InitialData::w0_check(double X, double K) const {
  if (zero_) return {0.0, 0.0};
  if (gaussian_) {
    const double e = std::exp(-2.0 * pi * pi * (sx_ * sx_ * X * X + sk_ * sk_ * K * K));
    return {amp_ * 2.0 * pi * sx_ * sk_ * e, 0.0};
  }
  if (X < Xs_.front() || X > Xs_.back() || K < Ks_.front() || K > Ks_.back()) {
    warned_->store(true);
    return {0.0, 0.0};
  }
  const std::size_t i = bracket(Xs_, X), j = bracket(Ks_, K);
  const double u = (X - Xs_[i]) / (Xs_[i + 1] - Xs_[i]);
  const double v = (K - Ks_[j]) / (Ks_[j + 1] - Ks_[j]);
  const std::size_t nK = Ks_.size();
  const double val = (1 - u) * ((1 - v) * table_[i * nK + j] + v * table_[i * nK + j + 1]) +
                     u * ((1 - v) * table_[(i + 1) * nK + j] + v * table_[(i + 1) * nK + j + 1]);
  return {val, 0.0};
}

cplx InitialData::f0(double X, double k) const {
  if (zero_) return {0.0, 0.0};
  if (gaussian_) {
    const double e =
        std::exp(-2.0 * pi * pi * sx_ * sx_ * X * X - k * k / (2.0 * sk_ * sk_));
    return {amp_ * std::sqrt(2.0 * pi) * sx_ * e, 0.0};
  }
  if (X < Xs_.front() || X > Xs_.back()) {
    warned_->store(true);
    return {0.0, 0.0};
  }
  // Invert the k -> K transform row-wise, then blend the bracketing rows.
  const std::size_t i = bracket(Xs_, X);
  const double u = (X - Xs_[i]) / (Xs_[i + 1] - Xs_[i]);
  const std::size_t nK = Ks_.size();
  std::vector<double> row(nK);
  const double w = -2.0 * pi * k;
  for (std::size_t j = 0; j < nK; ++j) row[j] = table_[i * nK + j];
  const cplx lo = oscillatory_row(Ks_, row, w);
  for (std::size_t j = 0; j < nK; ++j) row[j] = table_[(i + 1) * nK + j];
  const cplx hi = oscillatory_row(Ks_, row, w);
  return (1.0 - u) * lo + u * hi;
}

Interval InitialData::x_extent() const {
  if (gaussian_) {
    const double r = std::sqrt(std::log(1e16) / (2.0 * pi * pi * sx_ * sx_));
    return {-r, r};
  }
  return {Xs_.front(), Xs_.back()};
}

Interval InitialData::k_extent() const {
  if (gaussian_) {
    const double r = sk_ * std::sqrt(2.0 * std::log(1e16));
    return {-r, r};
  }
  // Resolution limit of the tabulated transform grid.
  double dK = Ks_.back() - Ks_.front();
  for (std::size_t j = 1; j < Ks_.size(); ++j) dK = std::min(dK, Ks_[j] - Ks_[j - 1]);
  const double nyq = 0.5 / std::max(dK, 1e-300);
  return {-nyq, nyq};
}

std::vector<std::pair<double, double>> InitialData::measure_decay(
    const std::vector<double>& rs) const {
  std::vector<std::pair<double, double>> out;
  auto probe = [&](double r) {
    double best = 0.0;
    if (gaussian_) {
      const Interval ex = x_extent();
      const double Khi = std::sqrt(std::log(1e16) / (2.0 * pi * pi * sk_ * sk_));
      const int n = 160;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
          const double X = ex.lo + ex.width() * i / n;
          const double K = -Khi + 2.0 * Khi * j / n;
          const double w = std::pow(std::abs(X), r) + std::pow(std::abs(K), r);
          best = std::max(best, std::abs(w0_check(X, K)) * (1.0 + w));
        }
    } else {
      for (std::size_t i = 0; i < Xs_.size(); ++i)
        for (std::size_t j = 0; j < Ks_.size(); ++j) {
          const double w = std::pow(std::abs(Xs_[i]), r) + std::pow(std::abs(Ks_[j]), r);
          best = std::max(best, std::abs(table_[i * Ks_.size() + j]) * (1.0 + w));
        }
    }
    return best;
  };
  for (double r : rs) {
    if (!(r >= 0.0)) throw ConfigError("measure_decay: exponents must be >= 0");
    out.emplace_back(r, probe(r));
  }
  return out;
}

cplx free_density(const InitialData& w0, const PhysicalParams& par, double X, double t) {
  return w0.w0_check(X, 2.0 * pi * par.p * t * X);
}

std::vector<cplx> solve_volterra(const KernelTable& kernel, const std::vector<cplx>& n_free,
                                 const std::vector<double>& t_grid, const SolverConfig& cfg) {
  const std::size_t nt = t_grid.size();
  if (n_free.size() != nt) throw ConfigError("solve_volterra: trace/grid size mismatch");
  if (kernel.times.size() != nt) throw ConfigError("solve_volterra: kernel/grid size mismatch");
  const double dt = uniform_step(t_grid, "solve_volterra");
  for (std::size_t i = 0; i < nt; ++i)
    if (std::abs(kernel.times[i] - t_grid[i]) > 1e-9 * (1.0 + std::abs(t_grid[i])))
      throw ConfigError("solve_volterra: kernel tabulated on a different grid");

  // Product trapezoidal marching; the j = n term is absorbed implicitly so a
  // small nonzero h(0) (from discrete kernels) is handled exactly.
  const cplx denom = 1.0 - 0.5 * dt * kernel.values[0];
  if (std::abs(denom) < 0.5)
    throw NumericalError("solve_volterra: kernel value at t=0 too large for the step");
  bool kernel_zero = true;
  for (const cplx& v : kernel.values) kernel_zero = kernel_zero && v == cplx(0.0, 0.0);
  if (kernel_zero) return n_free;

  std::vector<cplx> n(nt);
  n[0] = n_free[0];
  double forcing_scale = 0.0;
  for (const cplx& v : n_free) forcing_scale = std::max(forcing_scale, std::abs(v));
  forcing_scale = std::max(forcing_scale, 1e-300);
  for (std::size_t i = 1; i < nt; ++i) {
    cplx s = 0.5 * dt * kernel.values[i] * n[0];
    for (std::size_t j = 1; j < i; ++j) s += dt * kernel.values[i - j] * n[j];
    n[i] = (n_free[i] + s) / denom;
    if (std::abs(n[i]) > cfg.growth_cap * forcing_scale)
      throw NumericalError(
          "solve_volterra: amplification exceeds the growth cap; the configuration is likely "
          "unstable or the t-step too coarse");
  }
  return n;
}

KernelTable discrete_kernel(const Spectrum& P, const PhysicalParams& par, double X,
                            const std::vector<double>& k_grid,
                            const std::vector<double>& t_grid) {
  if (t_grid.empty() || t_grid.front() != 0.0)
    throw ConfigError("discrete_kernel: t grid must start at 0");
  const std::size_t nk = k_grid.size(), nt = t_grid.size();
  const std::vector<double> wk = trapezoid_weights(k_grid);
  KernelTable tab;
  tab.X = X;
  tab.times = t_grid;
  tab.values.assign(nt, {0.0, 0.0});
  tab.p_check.assign(nt, {0.0, 0.0});
  std::vector<double> dp(nk);
  for (std::size_t j = 0; j < nk; ++j)
    dp[j] = P(k_grid[j] - X / 2.0) - P(k_grid[j] + X / 2.0);
  const cplx miq{0.0, -par.q};
  for (std::size_t i = 0; i < nt; ++i) {
    cplx s{0.0, 0.0};
    for (std::size_t j = 0; j < nk; ++j)
      s += wk[j] * dp[j] * std::exp(cplx{0.0, 4.0 * pi * pi * par.p * k_grid[j] * X * t_grid[i]});
    tab.values[i] = miq * s;
  }
  return tab;
}

namespace {

DensityTrace trace_impl(const InitialData& w0, const Spectrum& P, const PhysicalParams& par,
                        std::vector<double> X_grid, const std::vector<double>* k_grid,
                        std::vector<double> t_grid, const SolverConfig& cfg) {
  par.validate();
  if (X_grid.empty()) throw ConfigError("density_trace: empty X grid");
  uniform_step(t_grid, "density_trace");
  if (t_grid.front() != 0.0) throw ConfigError("density_trace: t grid must start at 0");
  DensityTrace tr;
  tr.X_grid = std::move(X_grid);
  tr.t_grid = std::move(t_grid);
  const std::size_t nt = tr.t_grid.size();
  tr.n_free.assign(tr.X_grid.size() * nt, {0.0, 0.0});
  tr.n.assign(tr.X_grid.size() * nt, {0.0, 0.0});
  std::exception_ptr err;
  parallel_for(tr.X_grid.size(), cfg.workers, [&](std::size_t iX) {
    try {
      const double X = tr.X_grid[iX];
      std::vector<cplx> nf(nt);
      if (k_grid) {
        const std::vector<double> wk = trapezoid_weights(*k_grid);
        std::vector<cplx> f0row(k_grid->size());
        for (std::size_t j = 0; j < k_grid->size(); ++j) f0row[j] = w0.f0(X, (*k_grid)[j]);
        for (std::size_t i = 0; i < nt; ++i) {
          cplx s{0.0, 0.0};
          for (std::size_t j = 0; j < k_grid->size(); ++j)
            s += wk[j] * f0row[j] *
                 std::exp(cplx{0.0, 4.0 * pi * pi * par.p * (*k_grid)[j] * X * tr.t_grid[i]});
          nf[i] = s;
        }
      } else {
        for (std::size_t i = 0; i < nt; ++i) nf[i] = free_density(w0, par, X, tr.t_grid[i]);
      }
      const KernelTable ker = k_grid ? discrete_kernel(P, par, X, *k_grid, tr.t_grid)
                                     : kernel_h(P, par, X, tr.t_grid, cfg.quad);
      const std::vector<cplx> n = solve_volterra(ker, nf, tr.t_grid, cfg);
      std::copy(nf.begin(), nf.end(), tr.n_free.begin() + iX * nt);
      std::copy(n.begin(), n.end(), tr.n.begin() + iX * nt);
    } catch (...) {
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);
  return tr;
}

}  // namespace

DensityTrace density_trace(const InitialData& w0, const Spectrum& P, const PhysicalParams& par,
                           std::vector<double> X_grid, std::vector<double> t_grid,
                           const SolverConfig& cfg) {
  return trace_impl(w0, P, par, std::move(X_grid), nullptr, std::move(t_grid), cfg);
}

DensityTrace density_trace_discrete(const InitialData& w0, const Spectrum& P,
                                    const PhysicalParams& par, std::vector<double> X_grid,
                                    const std::vector<double>& k_grid,
                                    std::vector<double> t_grid, const SolverConfig& cfg) {
  return trace_impl(w0, P, par, std::move(X_grid), &k_grid, std::move(t_grid), cfg);
}

namespace {

double weighted_l2(const DensityTrace& tr, const std::vector<cplx>& field, double a, double b,
                   std::size_t stride) {
  std::vector<double> Xs, ts;
  for (std::size_t i = 0; i < tr.X_grid.size(); i += stride) Xs.push_back(tr.X_grid[i]);
  for (std::size_t j = 0; j < tr.t_grid.size(); j += stride) ts.push_back(tr.t_grid[j]);
  const std::vector<double> wX = trapezoid_weights(Xs), wt = trapezoid_weights(ts);
  double s = 0.0;
  for (std::size_t i = 0; i < Xs.size(); ++i) {
    const double xa = std::pow(std::abs(Xs[i]), 2.0 * a);
    double row = 0.0;
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const cplx v = field[(i * stride) * tr.nt() + j * stride];
      row += wt[j] * std::pow(ts[j], 2.0 * b) * std::norm(v);
    }
    s += wX[i] * xa * row;
  }
  return std::sqrt(s);
}

}  // namespace

std::vector<NormEntry> weighted_norms(DensityTrace& trace,
                                      const std::vector<std::pair<double, double>>& exponents) {
  std::vector<NormEntry> out;
  for (const auto& [a, b] : exponents) {
    if (a < 0.0 || b < 0.0) throw ConfigError("weighted_norms: exponents must be >= 0");
    NormEntry e;
    e.a = a;
    e.b = b;
    e.value_n = weighted_l2(trace, trace.n, a, b, 1);
    e.value_free = weighted_l2(trace, trace.n_free, a, b, 1);
    // Second-order quadrature: coarsening by 2 overshoots the error by ~3x.
    e.est_error_n = std::abs(e.value_n - weighted_l2(trace, trace.n, a, b, 2)) / 3.0;
    e.est_error_free = std::abs(e.value_free - weighted_l2(trace, trace.n_free, a, b, 2)) / 3.0;
    out.push_back(e);
  }
  trace.norms = out;
  return out;
}

PhaseSpaceField reconstruct_f(const InitialData& f0, const Spectrum& P, const PhysicalParams& par,
                              const DensityTrace& trace, const std::vector<double>& k_grid,
                              const SolverConfig& cfg) {
  if (k_grid.size() < 2) throw ConfigError("reconstruct_f: k grid too small");
  const std::size_t nx = trace.X_grid.size(), nk = k_grid.size(), nt = trace.nt();
  const double dt = uniform_step(trace.t_grid, "reconstruct_f");
  const int stride = std::max(1, cfg.store_every);
  PhaseSpaceField F;
  F.X_grid = trace.X_grid;
  F.k_grid = k_grid;
  std::vector<std::size_t> stored;
  for (std::size_t i = 0; i < nt; i += static_cast<std::size_t>(stride)) stored.push_back(i);
  if (stored.back() != nt - 1) stored.push_back(nt - 1);
  for (std::size_t i : stored) F.times.push_back(trace.t_grid[i]);
  F.values.assign(stored.size() * nx * nk, {0.0, 0.0});

  const std::vector<double> wk = trapezoid_weights(k_grid);
  std::vector<double> sup_n(nx, 0.0), resid(nx, 0.0);
  std::exception_ptr err;
  parallel_for(nx, cfg.workers, [&](std::size_t iX) {
    try {
      const double X = trace.X_grid[iX];
      const cplx* n = trace.n.data() + iX * nt;
      for (std::size_t i = 0; i < nt; ++i) sup_n[iX] = std::max(sup_n[iX], std::abs(n[i]));
      std::vector<cplx> col(stored.size());
      for (std::size_t ik = 0; ik < nk; ++ik) {
        const double k = k_grid[ik];
        const double phi = 4.0 * pi * pi * par.p * k * X;
        const double dp = P(k - X / 2.0) - P(k + X / 2.0);
        const cplx f00 = f0.f0(X, k);
        const cplx step = std::exp(cplx{0.0, -phi * dt});
        cplx rot{1.0, 0.0};  // e^{-i phi t_j}
        cplx D{0.0, 0.0};    // cumulative trapezoid of e^{-i phi tau} n(tau)
        std::size_t si = 0;
        for (std::size_t j = 0; j < nt; ++j) {
          if (j > 0) {
            const cplx prev = rot;
            rot *= step;
            D += 0.5 * dt * (prev * n[j - 1] + rot * n[j]);
          }
          if (si < stored.size() && stored[si] == j) {
            const cplx f = std::conj(rot) * (f00 - cplx{0.0, par.q} * dp * D);
            F.values[(si * nx + iX) * nk + ik] = f;
            ++si;
          }
        }
      }
      for (std::size_t si = 0; si < stored.size(); ++si) {
        cplx s{0.0, 0.0};
        for (std::size_t ik = 0; ik < nk; ++ik) s += wk[ik] * F.values[(si * nx + iX) * nk + ik];
        resid[iX] = std::max(resid[iX], std::abs(s - n[stored[si]]));
      }
    } catch (...) {
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);
  const double scale = std::max(*std::max_element(sup_n.begin(), sup_n.end()), 1e-300);
  F.consistency_residual = *std::max_element(resid.begin(), resid.end()) / scale;
  F.consistency_flagged = F.consistency_residual > cfg.consistency_tol;
  return F;
}

PhaseSpaceField picard_solve(const InitialData& f0, const Spectrum& P, const PhysicalParams& par,
                             double T0, double tol, const std::vector<double>& X_grid,
                             const std::vector<double>& k_grid, std::size_t nt,
                             PicardReport& report, const SolverConfig& cfg,
                             const PhaseSpaceField* initial) {
  par.validate();
  if (!(T0 > 0.0) || !(tol > 0.0)) throw ConfigError("picard_solve: T0 and tol must be positive");
  if (nt < 2) throw ConfigError("picard_solve: need at least two time nodes");
  const std::size_t nx = X_grid.size(), nk = k_grid.size();
  const double dX = uniform_step(X_grid, "picard_solve X");
  const double dk = uniform_step(k_grid, "picard_solve k");
  const double i0f = -X_grid.front() / dX;
  const long i0 = std::lround(i0f);
  if (std::abs(i0f - static_cast<double>(i0)) > 1e-9 || i0 < 0 ||
      i0 >= static_cast<long>(nx))
    throw ConfigError("picard_solve: X grid must contain 0 for the shear convolution");

  std::vector<double> t(nt);
  const double dt = T0 / static_cast<double>(nt - 1);
  for (std::size_t i = 0; i < nt; ++i) t[i] = dt * static_cast<double>(i);
  const std::vector<double> wX = trapezoid_weights(X_grid), wk = trapezoid_weights(k_grid);

  std::vector<cplx> F0(nx * nk);
  std::vector<double> dp(nx * nk);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < nk; ++j) {
      F0[i * nk + j] = f0.f0(X_grid[i], k_grid[j]);
      dp[i * nk + j] = P(k_grid[j] - X_grid[i] / 2.0) - P(k_grid[j] + X_grid[i] / 2.0);
    }
  const double norm_f0 = trap_l1(wX, wk, F0.data(), nx, nk);
  const double M = 2.0 * norm_f0;
  const double pl1 = P.integral();
  const double eps = par.epsilon;
  report = PicardReport{};
  report.M = M;
  report.T0_bound =
      1.0 / (std::abs(par.q) * std::max(4.0 * pl1, 4.0 * std::abs(eps)) * (M + 1.0));
  report.lipschitz_bound = 2.0 * T0 * std::abs(par.q) * (pl1 + 2.0 * eps * M);
  if (T0 >= report.T0_bound)
    throw ConfigError("picard_solve: T0 exceeds the contraction horizon for this data");

  const std::size_t slice = nx * nk;
  auto field_at = [nk, nx](const std::vector<cplx>& F, std::size_t j, long ix, double kq,
                           double k0, double dkv) -> cplx {
    if (ix < 0 || ix >= static_cast<long>(nx)) return {0.0, 0.0};
    const double pos = (kq - k0) / dkv;
    if (pos < 0.0 || pos > static_cast<double>(nk - 1)) return {0.0, 0.0};
    const std::size_t jl = std::min(static_cast<std::size_t>(pos), nk - 2);
    const double u = pos - static_cast<double>(jl);
    const cplx* s = F.data() + j * nx * nk + static_cast<std::size_t>(ix) * nk;
    return (1.0 - u) * s[jl] + u * s[jl + 1];
  };

  std::vector<cplx> F(nt * slice);
  if (initial) {
    if (initial->X_grid != X_grid || initial->k_grid != k_grid ||
        initial->times.size() != nt)
      throw ConfigError("picard_solve: initial field on a different grid");
    F = initial->values;
  } else {
    for (std::size_t j = 0; j < nt; ++j)
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t l = 0; l < nk; ++l) {
          const double phi = 4.0 * pi * pi * par.p * k_grid[l] * X_grid[i];
          F[j * slice + i * nk + l] = std::exp(cplx{0.0, phi * t[j]}) * F0[i * nk + l];
        }
  }

  std::vector<cplx> B(nt * slice), G(nt * slice), m(nt * nx);
  const int maxit = 60;
  const double dscale = std::max(1.0, norm_f0);
  std::exception_ptr err;
  for (int it = 0; it < maxit; ++it) {
    for (std::size_t j = 0; j < nt; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        cplx s{0.0, 0.0};
        for (std::size_t l = 0; l < nk; ++l) s += wk[l] * F[j * slice + i * nk + l];
        m[j * nx + i] = s;
      }
    parallel_for(nt, cfg.workers, [&](std::size_t j) {
      try {
        const cplx iq{0.0, par.q};
        for (std::size_t i = 0; i < nx; ++i) {
          for (std::size_t l = 0; l < nk; ++l)
            B[j * slice + i * nk + l] = iq * dp[i * nk + l] * m[j * nx + i];
          if (eps != 0.0) {
            for (std::size_t s = 0; s < nx; ++s) {
              const cplx ms = wX[s] * m[j * nx + s];
              if (std::abs(ms) == 0.0) continue;
              const long ix = static_cast<long>(i) - static_cast<long>(s) + i0;
              for (std::size_t l = 0; l < nk; ++l) {
                const cplx lo = field_at(F, j, ix, k_grid[l] - X_grid[s] / 2.0, k_grid[0], dk);
                const cplx hi = field_at(F, j, ix, k_grid[l] + X_grid[s] / 2.0, k_grid[0], dk);
                B[j * slice + i * nk + l] += eps * iq * ms * (lo - hi);
              }
            }
          }
        }
      } catch (...) {
        if (!err) err = std::current_exception();
      }
    });
    if (err) std::rethrow_exception(err);

    // G(t_n) = U(t_n) (F0 - D_n), D_n the running trapezoid of U(-tau) B(tau).
    parallel_for(nx, cfg.workers, [&](std::size_t i) {
      for (std::size_t l = 0; l < nk; ++l) {
        const double phi = 4.0 * pi * pi * par.p * k_grid[l] * X_grid[i];
        const cplx step = std::exp(cplx{0.0, -phi * dt});
        cplx rot{1.0, 0.0}, D{0.0, 0.0};
        G[i * nk + l] = F0[i * nk + l];
        for (std::size_t n = 1; n < nt; ++n) {
          const cplx prev = rot;
          rot *= step;
          D += 0.5 * dt * (prev * B[(n - 1) * slice + i * nk + l] + rot * B[n * slice + i * nk + l]);
          G[n * slice + i * nk + l] = std::conj(rot) * (F0[i * nk + l] - D);
        }
      }
    });

    double dist = 0.0, sup_norm = 0.0;
    std::vector<cplx> diff(slice);
    for (std::size_t j = 0; j < nt; ++j) {
      for (std::size_t s = 0; s < slice; ++s) diff[s] = G[j * slice + s] - F[j * slice + s];
      dist = std::max(dist, trap_l1(wX, wk, diff.data(), nx, nk));
      sup_norm = std::max(sup_norm, trap_l1(wX, wk, G.data() + j * slice, nx, nk));
    }
    if (sup_norm > M * (1.0 + 1e-9))
      throw NumericalError("picard_solve: iterate exceeded the contraction bound M");
    F.swap(G);
    report.distances.push_back(dist);
    report.iterations = it + 1;
    if (report.distances.size() >= 2) {
      const double prev = report.distances[report.distances.size() - 2];
      if (prev > 1e-13 * dscale)
        report.contraction_ratio = std::max(report.contraction_ratio, dist / prev);
    }
    if (dist < tol * dscale) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged)
    throw NumericalError("picard_solve: no convergence within the iteration budget");

  PhaseSpaceField out;
  out.X_grid = X_grid;
  out.k_grid = k_grid;
  out.times = t;
  out.values = std::move(F);
  return out;
}

ScatteringData scattering_limit(const InitialData& f0, const Spectrum& P,
                                const PhysicalParams& par, const DensityTrace& trace,
                                double T_max, const std::vector<double>& k_grid, double tail_tol,
                                const SolverConfig& cfg) {
  if (!(T_max > 0.0)) throw ConfigError("scattering_limit: T_max must be positive");
  if (trace.t_grid.back() < T_max * (1.0 - 1e-12))
    throw ConfigError("scattering_limit: trace shorter than T_max");
  const std::size_t nx = trace.X_grid.size(), nk = k_grid.size();
  std::size_t it_max = 0;
  while (it_max + 1 < trace.nt() && trace.t_grid[it_max + 1] <= T_max * (1.0 + 1e-12)) ++it_max;
  const std::size_t nt = it_max + 1;
  const double T = trace.t_grid[it_max];

  std::vector<std::size_t> cp_idx;
  for (int c = 1; c <= 6; ++c) {
    const double tc = T * c / 6.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < nt; ++i)
      if (std::abs(trace.t_grid[i] - tc) < std::abs(trace.t_grid[best] - tc)) best = i;
    if (cp_idx.empty() || cp_idx.back() != best) cp_idx.push_back(best);
  }

  ScatteringData out;
  out.X_grid = trace.X_grid;
  out.k_grid = k_grid;
  for (std::size_t i : cp_idx) out.checkpoint_times.push_back(trace.t_grid[i]);
  out.J_infinity.assign(nx * nk, {0.0, 0.0});
  out.wave_op.assign(nx * nk, {0.0, 0.0});
  std::vector<cplx> snaps(cp_idx.size() * nx * nk, {0.0, 0.0});

  std::exception_ptr err;
  parallel_for(nx, cfg.workers, [&](std::size_t iX) {
    try {
      const double X = trace.X_grid[iX];
      const cplx* n = trace.n.data() + iX * trace.nt();
      for (std::size_t ik = 0; ik < nk; ++ik) {
        const double k = k_grid[ik];
        const double phi = 4.0 * pi * pi * par.p * k * X;
        const double dp = P(k + X / 2.0) - P(k - X / 2.0);
        const cplx qi{0.0, par.q};
        cplx J{0.0, 0.0};
        cplx rot{1.0, 0.0};
        std::size_t ci = 0;
        for (std::size_t j = 0; j < nt; ++j) {
          if (j > 0) {
            const double h = trace.t_grid[j] - trace.t_grid[j - 1];
            const cplx prev = rot;
            rot = std::exp(cplx{0.0, -phi * trace.t_grid[j]});
            J += 0.5 * h * qi * dp * (prev * n[j - 1] + rot * n[j]);
          }
          while (ci < cp_idx.size() && cp_idx[ci] == j) {
            snaps[(ci * nx + iX) * nk + ik] = J;
            ++ci;
          }
        }
        out.J_infinity[iX * nk + ik] = J;
        out.wave_op[iX * nk + ik] = f0.f0(X, k) + J;
      }
    } catch (...) {
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);

  const std::vector<double> wX = trapezoid_weights(trace.X_grid);
  auto supk_intx = [&](const cplx* A, const cplx* Bp) {
    double best = 0.0;
    for (std::size_t ik = 0; ik < nk; ++ik) {
      double s = 0.0;
      for (std::size_t iX = 0; iX < nx; ++iX) {
        const cplx d = A[iX * nk + ik] - (Bp ? Bp[iX * nk + ik] : cplx{0.0, 0.0});
        s += wX[iX] * std::abs(d);
      }
      best = std::max(best, s);
    }
    return best;
  };
  for (std::size_t ci = 0; ci < cp_idx.size(); ++ci)
    out.checkpoint_norms.push_back(supk_intx(snaps.data() + ci * nx * nk, out.J_infinity.data()));
  out.sup_k_int_J = supk_intx(out.J_infinity.data(), nullptr);

  // Tail of int_T^inf |q| sup|P'| m(t) dt with m(t) = int |X n| dX fitted to
  // a power law over the second half of the run.
  double supdp = 0.0;
  for (double k : P.grid()) supdp = std::max(supdp, std::abs(P.derivative(k)));
  double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
  int nfit = 0;
  for (std::size_t j = 0; j < nt; ++j) {
    if (trace.t_grid[j] < 0.5 * T || trace.t_grid[j] <= 0.0) continue;
    double mj = 0.0;
    for (std::size_t iX = 0; iX < nx; ++iX)
      mj += wX[iX] * std::abs(trace.X_grid[iX]) * std::abs(trace.at(iX, j));
    if (mj <= 0.0) continue;
    const double lx = std::log(trace.t_grid[j]), ly = std::log(mj);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++nfit;
  }
  if (nfit < 4) throw NumericalError("scattering_limit: too few points to fit the density decay");
  const double det = nfit * sxx - sx * sx;
  const double slope = (nfit * sxy - sx * sy) / det;
  const double logc = (sy - slope * sx) / nfit;
  out.decay_exponent = -slope;
  if (out.decay_exponent <= 1.05)
    throw NumericalError("scattering_limit: T_max too small (density decay exponent <= 1)");
  out.tail_bound = std::abs(par.q) * supdp * std::exp(logc) *
                   std::pow(T, 1.0 - out.decay_exponent) / (out.decay_exponent - 1.0);
  if (out.tail_bound > tail_tol)
    throw NumericalError("scattering_limit: T_max too small for the requested tail tolerance");
  return out;
}

}  // namespace alber
