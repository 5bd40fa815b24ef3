#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "alber/spectrum.hpp"
#include "alber/stability.hpp"

using namespace alber;

namespace {

// Independent signed ray-crossing oracle for the winding number: cast the
// horizontal ray to +infinity and sum crossing signs.
int ray_winding(const std::vector<cplx>& poly, cplx z) {
  int w = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const cplx a = poly[i], b = poly[i + 1];
    const bool up = a.imag() <= z.imag() && b.imag() > z.imag();
    const bool dn = a.imag() > z.imag() && b.imag() <= z.imag();
    if (!up && !dn) continue;
    const double t = (z.imag() - a.imag()) / (b.imag() - a.imag());
    const double xcross = a.real() + t * (b.real() - a.real());
    if (xcross > z.real()) w += up ? 1 : -1;
  }
  return w;
}

double dist_to_polygon(const std::vector<cplx>& poly, cplx z) {
  double d = 1e300;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const cplx a = poly[i], e = poly[i + 1] - poly[i];
    const double L2 = std::norm(e);
    double t = L2 > 0.0 ? ((z - a) * std::conj(e)).real() / L2 : 0.0;
    t = std::min(1.0, std::max(0.0, t));
    d = std::min(d, std::abs(z - (a + t * e)));
  }
  return d;
}

}  // namespace

TEST_CASE("winding_number agrees with a signed ray-cast oracle") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> pt(-2.0, 2.0);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    // random trigonometric polynomial curve; self-intersections are expected
    double ac[4], as[4], bc[4], bs[4];
    for (int m = 0; m < 4; ++m) {
      ac[m] = coef(rng); as[m] = coef(rng);
      bc[m] = coef(rng); bs[m] = coef(rng);
    }
    std::vector<cplx> poly;
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
      const double th = 2.0 * pi * i / n;
      double x = 0.0, y = 0.0;
      for (int m = 0; m < 4; ++m) {
        x += ac[m] * std::cos((m + 1) * th) + as[m] * std::sin((m + 1) * th);
        y += bc[m] * std::cos((m + 1) * th) + bs[m] * std::sin((m + 1) * th);
      }
      poly.emplace_back(x, y);
    }
    poly.back() = poly.front();
    for (int k = 0; k < 40; ++k) {
      const cplx z(pt(rng), pt(rng));
      if (dist_to_polygon(poly, z) < 1e-3) continue;  // ambiguous near the curve
      CHECK(winding_number(poly, z) == ray_winding(poly, z));
      ++checked;
    }
  }
  CHECK(checked > 1500);
}

TEST_CASE("winding_contains classifies inside / outside / on a square") {
  ContourCurve c;
  c.points = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, -1}};
  c.closed = true;
  CHECK(winding_contains(c, {0.0, 0.0}, 1e-6) == PointLocation::inside);
  CHECK(winding_contains(c, {2.0, 0.0}, 1e-6) == PointLocation::outside);
  CHECK(winding_contains(c, {1.0, 0.3}, 1e-6) == PointLocation::on_curve);
}

TEST_CASE("zero spectrum: stable with unit margin") {
  Spectrum P;
  PhysicalParams par;
  const StabilityVerdict v = is_unstable(P, par, {});
  CHECK(!v.unstable);
  CHECK(std::abs(v.kappa_estimate - 1.0) < 1e-6);
  CHECK(v.unstable_X.empty());
}

TEST_CASE("tiny alpha is stable and the sufficient condition fires") {
  JonswapParams jp;
  jp.alpha = 1e-6;
  const Spectrum P = Spectrum::jonswap(jp);
  PhysicalParams par;
  CHECK(!is_unstable(P, par, {}).unstable);
  CHECK(sufficient_stable(P, par, {}) == SufficientVerdict::stable);
}

TEST_CASE("default jonswap sea is stable") {
  const Spectrum P = Spectrum::jonswap({});
  PhysicalParams par;
  const StabilityVerdict v = is_unstable(P, par, {});
  CHECK(!v.unstable);
  CHECK(v.kappa_estimate > 0.0);
  CHECK(v.kappa_estimate <= 1.0 + 1e-9);
}

TEST_CASE("steep narrow sea is unstable with symmetric bands and a witness") {
  JonswapParams jp;
  jp.alpha = 0.2;
  jp.gamma = 6.0;
  const Spectrum P = Spectrum::jonswap(jp);
  PhysicalParams par;
  const StabilityVerdict v = is_unstable(P, par, {});
  REQUIRE(v.unstable);
  REQUIRE(!v.unstable_X.empty());
  // bands come in symmetric pairs about X = 0
  const Interval lo = v.unstable_X.front(), hi = v.unstable_X.back();
  CHECK(lo.lo == doctest::Approx(-hi.hi));
  CHECK(lo.hi == doctest::Approx(-hi.lo));
  const EigenWitness w = eigenvalue_crosscheck(P, par, v);
  CHECK(w.found);
  CHECK(w.residual < 1e-8);
  CHECK(par.p * w.X * w.Omega.imag() < 0.0);
}

TEST_CASE("verdict is invariant under carrier rescaling") {
  JonswapParams steep;
  steep.alpha = 0.2;
  steep.gamma = 6.0;
  steep.k0 = 0.044;
  const Spectrum P = Spectrum::jonswap(steep);  // rescaled internally
  PhysicalParams par;
  CHECK(is_unstable(P, par, {}).unstable);
}

TEST_CASE("gamma_curve demands a wide enough t range and closes the trace") {
  const Spectrum P = Spectrum::jonswap({});
  PhysicalParams par;
  std::vector<double> narrow = {0.9, 0.95, 1.0, 1.05, 1.1};
  CHECK_THROWS_AS((void)gamma_curve(P, par, 0.5, narrow, 1e-4, {}), NumericalError);
  std::vector<double> wide;
  for (int i = 0; i <= 800; ++i) wide.push_back(-6.0 + 12.0 * i / 800);
  const ContourCurve c = gamma_curve(P, par, 0.5, wide, 1e-4, {});
  CHECK(c.closed);
  CHECK(c.points.front() == cplx(0.0, 0.0));
  CHECK(c.points.back() == cplx(0.0, 0.0));
  CHECK(c.sup_abs() > 0.0);
}

TEST_CASE("kappa_estimate is 1 for the zero spectrum and below 1 otherwise") {
  PhysicalParams par;
  Spectrum zero;
  CHECK(kappa_estimate(zero, par, {0.0, 0.5}, {0.0, 1.0}) == doctest::Approx(1.0));
  const Spectrum P = Spectrum::jonswap({});
  std::vector<double> xs, ss;
  for (int i = 1; i <= 20; ++i) xs.push_back(0.1 * i);
  for (int i = 0; i <= 60; ++i) ss.push_back(-3.0 + 0.1 * i);
  const double kap = kappa_estimate(P, par, xs, ss);
  CHECK(kap > 0.0);
  CHECK(kap < 1.0);
}

TEST_CASE("small scan plane is consistent with pointwise verdicts") {
  PhysicalParams par;
  StabilityConfig cfg;
  const std::vector<double> gs = {1.5, 6.0};
  const std::vector<double> as = {1e-4, 0.2};
  const ScanResult r = scan_plane(gs, as, 1.0, par, cfg);
  REQUIRE(r.cells.size() == 4);
  for (std::size_t ig = 0; ig < gs.size(); ++ig)
    for (std::size_t ia = 0; ia < as.size(); ++ia) {
      const ScanCell& c = r.cells[ig * as.size() + ia];
      CHECK(c.gamma == gs[ig]);
      CHECK(c.alpha == as[ia]);
      REQUIRE(c.status >= 0);
      JonswapParams jp;
      jp.gamma = gs[ig];
      jp.alpha = as[ia];
      const bool u = is_unstable(Spectrum::jonswap(jp), par, {}, cfg).unstable;
      CHECK(c.status == (u ? 1 : 0));
      if (c.status == 1) CHECK(c.bandwidth.width() > 0.0);
    }
}

TEST_CASE("parallel scan matches the serial reference bit for bit") {
  PhysicalParams par;
  StabilityConfig serial, wide;
  wide.workers = 4;
  const std::vector<double> gs = {2.0, 5.0};
  const std::vector<double> as = {0.01, 0.15};
  const ScanResult a = scan_plane(gs, as, 1.0, par, serial);
  const ScanResult b = scan_plane(gs, as, 1.0, par, wide);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].status == b.cells[i].status);
    CHECK(a.cells[i].kappa == b.cells[i].kappa);
    CHECK(a.cells[i].bandwidth.lo == b.cells[i].bandwidth.lo);
    CHECK(a.cells[i].bandwidth.hi == b.cells[i].bandwidth.hi);
  }
}
