#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "doctest.h"

#include "alber/solver.hpp"
#include "alber/spectrum.hpp"
#include "alber/transforms.hpp"

using namespace alber;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("gaussian data: transforms are mutually consistent") {
  const InitialData w0 = InitialData::gaussian(0.7, 1.3, 0.8);
  CHECK(!w0.is_zero());
  // w0_check(X, K) = A 2 pi sx sk exp(-2 pi^2 (sx^2 X^2 + sk^2 K^2))
  const double A = 0.7, sx = 1.3, sk = 0.8;
  const cplx v = w0.w0_check(0.3, -0.2);
  const double exact =
      A * 2.0 * pi * sx * sk *
      std::exp(-2.0 * pi * pi * (sx * sx * 0.09 + sk * sk * 0.04));
  CHECK(v.real() == doctest::Approx(exact).epsilon(1e-10));
  CHECK(v.imag() == 0.0);
  // f0(X,k) = A sqrt(2 pi) sx exp(-2 pi^2 sx^2 X^2 - k^2/(2 sk^2))
  const cplx f = w0.f0(0.3, 0.5);
  const double fex = A * std::sqrt(2.0 * pi) * sx *
                     std::exp(-2.0 * pi * pi * sx * sx * 0.09 - 0.25 / (2.0 * sk * sk));
  CHECK(f.real() == doctest::Approx(fex).epsilon(1e-10));
  // w0_check is the K-transform of f0: check one point by quadrature
  const double X = 0.3, K = 0.15;
  cplx acc = 0.0;
  const int n = 4000;
  const double kl = -8.0, kh = 8.0;
  for (int i = 0; i <= n; ++i) {
    const double k = kl + (kh - kl) * i / n;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * (kh - kl) / n * std::exp(cplx(0.0, 2.0 * pi * k * K)) * w0.f0(X, k);
  }
  CHECK(std::abs(acc - w0.w0_check(X, K)) < 1e-8);
}

TEST_CASE("gaussian data: extents, decay and scaling") {
  const InitialData w0 = InitialData::gaussian(1.0, 1.0, 1.0);
  CHECK(w0.x_extent().contains(0.0));
  CHECK(w0.k_extent().contains(0.0));
  const auto decay = w0.measure_decay({2.0, 4.0});
  REQUIRE(decay.size() == 2);
  CHECK(decay[0].second > 0.0);
  // a Gaussian decays faster than any power, so D_r stays bounded by a few D_2
  CHECK(decay[1].second < 100.0 * decay[0].second);
  const InitialData half = w0.scaled(0.5);
  CHECK(half.w0_check(0.2, 0.1) == 0.5 * w0.w0_check(0.2, 0.1));
  CHECK(half.f0(0.2, 0.1) == 0.5 * w0.f0(0.2, 0.1));
}

TEST_CASE("tabulated data loads, evaluates and flags extrapolation") {
  const std::string path = "w0_table_test.dat";
  {
    const InitialData g = InitialData::gaussian(1.0, 1.0, 1.0);
    std::ofstream f(path);
    f << "# X K value\n";
    f.precision(12);
    for (int i = 0; i <= 160; ++i)
      for (int j = 0; j <= 160; ++j) {
        const double X = -2.0 + 4.0 * i / 160.0, K = -2.0 + 4.0 * j / 160.0;
        f << X << " " << K << " " << g.w0_check(X, K).real() << "\n";
      }
  }
  const InitialData t = InitialData::load_table(path);
  const InitialData g = InitialData::gaussian(1.0, 1.0, 1.0);
  CHECK(std::abs(t.w0_check(0.31, -0.17) - g.w0_check(0.31, -0.17)) < 1e-2);
  CHECK(std::abs(t.f0(0.2, 0.4) - g.f0(0.2, 0.4)) < 1e-2);
  CHECK(!t.extrapolated());
  CHECK(t.w0_check(5.0, 0.0) == cplx(0.0, 0.0));
  CHECK(t.extrapolated());
  std::remove(path.c_str());
}

TEST_CASE("load_table rejects malformed files with line numbers") {
  const std::string path = "w0_bad_test.dat";
  {
    std::ofstream f(path);
    f << "0 0 1\n0 1 nope\n";
  }
  try {
    (void)InitialData::load_table(path);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("free density rides the shear line") {
  const InitialData w0 = InitialData::gaussian(1.0, 1.0, 1.0);
  PhysicalParams par;
  for (double X : {0.0, 0.4, -1.1})
    for (double t : {0.0, 2.0, 7.5}) {
      const cplx n = free_density(w0, par, X, t);
      CHECK(std::abs(n - w0.w0_check(X, 2.0 * pi * par.p * t * X)) < 1e-14);
    }
}

TEST_CASE("volterra with zero kernel returns the forcing") {
  const std::vector<double> ts = linspace(0.0, 1.0, 21);
  KernelTable k;
  k.X = 0.5;
  k.times = ts;
  k.values.assign(ts.size(), cplx(0.0, 0.0));
  std::vector<cplx> nf(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) nf[i] = std::exp(-ts[i]);
  const std::vector<cplx> n = solve_volterra(k, nf, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(n[i] - nf[i]) < 1e-14);
}

TEST_CASE("volterra second-order convergence on a manufactured problem") {
  // n(t) = e^{-t}, h(t) = c sin(t) e^{-t}  =>  n_free = e^{-t} (1 - c (1 - cos t))
  const double c = 0.8;
  auto solve_err = [&](int n) {
    const std::vector<double> ts = linspace(0.0, 2.0, n + 1);
    KernelTable k;
    k.X = 1.0;
    k.times = ts;
    for (double t : ts) k.values.push_back(c * std::sin(t) * std::exp(-t));
    std::vector<cplx> nf;
    for (double t : ts) nf.push_back(std::exp(-t) * (1.0 - c * (1.0 - std::cos(t))));
    const std::vector<cplx> sol = solve_volterra(k, nf, ts);
    double err = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i)
      err = std::max(err, std::abs(sol[i] - std::exp(-ts[i])));
    return err;
  };
  const double e1 = solve_err(40), e2 = solve_err(80);
  const double ratio = e1 / e2;
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("volterra rejects mismatched grids and runaway growth") {
  const std::vector<double> ts = linspace(0.0, 1.0, 11);
  KernelTable k;
  k.X = 1.0;
  k.times = linspace(0.0, 2.0, 11);
  k.values.assign(11, cplx(0.0, 0.0));
  std::vector<cplx> nf(11, cplx(1.0, 0.0));
  CHECK_THROWS_AS((void)solve_volterra(k, nf, ts), ConfigError);
  // a strongly amplifying kernel must trip the growth cap
  KernelTable grow;
  grow.X = 1.0;
  grow.times = linspace(0.0, 10.0, 201);
  for (double t : grow.times) grow.values.push_back(cplx(6.0, 0.0) * (t > 0.0 ? 1.0 : 0.0));
  std::vector<cplx> nf2(201, cplx(1.0, 0.0));
  SolverConfig cfg;
  cfg.growth_cap = 10.0;
  CHECK_THROWS_AS((void)solve_volterra(grow, nf2, grow.times), NumericalError);
}

TEST_CASE("density trace with zero spectrum reduces to free evolution") {
  const InitialData w0 = InitialData::gaussian(1.0, 1.0, 1.0);
  Spectrum P;
  PhysicalParams par;
  DensityTrace tr = density_trace(w0, P, par, linspace(-1.0, 1.0, 9), linspace(0.0, 4.0, 41));
  for (std::size_t iX = 0; iX < tr.X_grid.size(); ++iX)
    for (std::size_t it = 0; it < tr.nt(); ++it)
      CHECK(std::abs(tr.at(iX, it) - tr.free_at(iX, it)) < 1e-14);
}

TEST_CASE("weighted norms and their grid-coarsening error estimates") {
  const InitialData w0 = InitialData::gaussian(1.0, 1.0, 1.0);
  Spectrum P;
  PhysicalParams par;
  DensityTrace tr = density_trace(w0, P, par, linspace(-2.0, 2.0, 41), linspace(0.0, 8.0, 81));
  const auto norms = weighted_norms(tr, {{1.0, 0.0}, {1.4, 1.0}});
  REQUIRE(norms.size() == 2);
  for (const NormEntry& e : norms) {
    CHECK(e.value_n > 0.0);
    CHECK(e.value_n == doctest::Approx(e.value_free).epsilon(1e-12));
    CHECK(e.est_error_n < 0.2 * e.value_n);
  }
  CHECK(tr.norms.size() == 2);
}

TEST_CASE("discrete kernel matches the exact kernel on a fine k grid") {
  // a compactly concentrated spectrum keeps the uniform k grid both wide
  // enough for the mass and fine enough for the oscillation
  std::vector<double> kk, vv;
  for (int i = 0; i <= 400; ++i) {
    kk.push_back(-3.0 + 7.0 * i / 400.0);
    vv.push_back(0.004 * std::exp(-(kk.back() - 1.0) * (kk.back() - 1.0) / 0.5));
  }
  const Spectrum P = Spectrum::from_samples(kk, vv);
  PhysicalParams par;
  const double X = 0.5;
  const std::vector<double> ts = linspace(0.0, 10.0, 101);
  const Interval s = P.support().inflated(0.5 + X);
  const std::vector<double> ks = linspace(s.lo, s.hi, 6001);
  const KernelTable exact = kernel_h(P, par, X, ts);
  const KernelTable disc = discrete_kernel(P, par, X, ks, ts);
  double sup = 0.0;
  for (const cplx& v : exact.values) sup = std::max(sup, std::abs(v));
  for (std::size_t i = 0; i < ts.size(); ++i)
    CHECK(std::abs(exact.values[i] - disc.values[i]) < 2e-4 * sup);
}

TEST_CASE("reconstructed field integrates back to the density") {
  const InitialData w0 = InitialData::gaussian(0.5, 1.0, 1.0);
  const Spectrum P = Spectrum::jonswap({});
  PhysicalParams par;
  const std::vector<double> Xs = linspace(-1.0, 1.0, 11);
  const std::vector<double> ks = linspace(-4.0, 6.0, 301);
  const std::vector<double> ts = linspace(0.0, 5.0, 101);
  SolverConfig cfg;
  DensityTrace tr = density_trace_discrete(w0, P, par, Xs, ks, ts, cfg);
  const PhaseSpaceField f = reconstruct_f(w0, P, par, tr, ks, cfg);
  CHECK(!f.consistency_flagged);
  CHECK(f.consistency_residual < cfg.consistency_tol);
}

TEST_CASE("picard iteration contracts within its a-priori bound") {
  const InitialData f0 = InitialData::gaussian(0.5, 1.0, 1.0);
  const Spectrum P = Spectrum::jonswap({});
  PhysicalParams par;
  par.epsilon = 0.05;
  PicardReport rep;
  const std::vector<double> Xs = linspace(-1.5, 1.5, 13);
  const std::vector<double> ks = linspace(-4.0, 6.0, 121);
  const double T0 = 0.02;
  (void)picard_solve(f0, P, par, T0, 1e-10, Xs, ks, 9, rep);
  CHECK(rep.converged);
  CHECK(T0 < rep.T0_bound);
  CHECK(rep.contraction_ratio <= rep.lipschitz_bound + 0.05);
  CHECK(rep.iterations >= 2);
  REQUIRE(rep.distances.size() >= 2);
  CHECK(rep.distances.back() < rep.distances.front());
}
