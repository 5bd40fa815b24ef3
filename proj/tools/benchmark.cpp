// Compares the serial reference path (workers = 1) against the OpenMP pool
// on the two hot kernels: curve tracing across X and Volterra columns.
#include <chrono>
#include <cstdio>

#include "alber/solver.hpp"
#include "alber/spectrum.hpp"
#include "alber/stability.hpp"

using namespace alber;

namespace {


template <typename F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int workers = argc > 1 ? std::atoi(argv[1]) : 8;
  JonswapParams jp;
  jp.alpha = 0.02;
  const Spectrum P = Spectrum::jonswap(jp);
  const PhysicalParams par;

  auto stability_run = [&](int w) {
    StabilityConfig cfg;
    cfg.workers = w;
    return timed([&] { (void)is_unstable(P, par, {}, cfg); });
  };
  auto solver_run = [&](int w) {
    const InitialData w0 = InitialData::gaussian(1.0, 1.0, 1.0);
    std::vector<double> Xg, tg;
    for (int i = 0; i <= 32; ++i) Xg.push_back(-2.0 + 4.0 * i / 32);
    for (int i = 0; i <= 600; ++i) tg.push_back(0.05 * i);
    SolverConfig cfg;
    cfg.workers = w;
    return timed([&] { (void)density_trace(w0, P, par, Xg, tg, cfg); });
  };

  const double s1 = stability_run(1), sw = stability_run(workers);
  std::printf("stability scan   serial %.3fs  %d workers %.3fs  speedup %.2fx\n", s1, workers,
              sw, s1 / sw);
  const double v1 = solver_run(1), vw = solver_run(workers);
  std::printf("volterra columns serial %.3fs  %d workers %.3fs  speedup %.2fx\n", v1, workers,
              vw, v1 / vw);
  return 0;
}
