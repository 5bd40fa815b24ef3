#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "alber/common.hpp"
#include "alber/spectrum.hpp"
#include "alber/transforms.hpp"

namespace alber {

/// Initial inhomogeneity w0(x,k), held through its partial transforms:
/// f0(X,k) is the Fourier transform of w0 in x, and w0_check(X,K) is the
/// further transform of f0 in k.  Either a closed-form Gaussian wave packet
/// or a tabulated real w0_check on a rectangular (X,K) grid.
class InitialData {
 public:
  /// w0(x,k) = amplitude * exp(-x^2/(2 sx^2)) * exp(-k^2/(2 sk^2)).
  static InitialData gaussian(double amplitude, double sigma_x, double sigma_k);
  /// Three-column text file "X K value": rows of a rectangular grid of
  /// real w0_check samples, in any order, '#' comments allowed.
  static InitialData load_table(const std::string& path);

  bool is_zero() const { return zero_; }

  /// w0_check(X,K); outside the tabulated grid it is taken as 0 and the
  /// extrapolation flag is raised.
  cplx w0_check(double X, double K) const;
  /// f0(X,k); for tabulated data this inverts the k->K transform of the
  /// bracketing grid rows by product integration.
  cplx f0(double X, double k) const;

  /// Range outside which w0_check is negligible in X / f0 negligible in k.
  Interval x_extent() const;
  Interval k_extent() const;

  /// Smallest D with |w0_check(X,K)| <= D/(1+|X|^r+|K|^r) over the sampled
  /// grid, for each requested r.
  std::vector<std::pair<double, double>> measure_decay(const std::vector<double>& rs) const;

  /// True once any evaluation fell outside the tabulated grid.
  bool extrapolated() const { return warned_ && warned_->load(); }

  InitialData scaled(double factor) const;

 private:
  InitialData() = default;
  bool zero_ = true;
  bool gaussian_ = false;
  double amp_ = 0.0, sx_ = 1.0, sk_ = 1.0;
  std::vector<double> Xs_, Ks_;
  std::vector<double> table_;  // row-major [iX * nK + iK]
  std::shared_ptr<std::atomic<bool>> warned_;
};

struct SolverConfig {
  int workers = 1;
  double growth_cap = 10.0;       // per-solve amplification limit
  double consistency_tol = 1e-6;  // density-consistency flag threshold
  int store_every = 1;            // time stride for stored field slices
  QuadConfig quad{};
};

struct NormEntry {
  double a = 0.0, b = 0.0;
  double value_n = 0.0, value_free = 0.0;
  double est_error_n = 0.0, est_error_free = 0.0;  // grid-coarsening estimate
};

struct DensityTrace {
  std::vector<double> X_grid, t_grid;
  std::vector<cplx> n_free, n;  // row-major [iX * nt + it]
  std::vector<NormEntry> norms;

  std::size_t nt() const { return t_grid.size(); }
  cplx free_at(std::size_t iX, std::size_t it) const { return n_free[iX * nt() + it]; }
  cplx at(std::size_t iX, std::size_t it) const { return n[iX * nt() + it]; }
};

struct PhaseSpaceField {
  std::vector<double> X_grid, k_grid, times;
  std::vector<cplx> values;  // [(it * nX + iX) * nk + ik]
  double consistency_residual = 0.0;
  bool consistency_flagged = false;

  cplx at(std::size_t it, std::size_t iX, std::size_t ik) const {
    return values[(it * X_grid.size() + iX) * k_grid.size() + ik];
  }
};

struct PicardReport {
  int iterations = 0;
  std::vector<double> distances;   // successive-iterate sup_t L1 distances
  double contraction_ratio = 0.0;  // max observed distance ratio
  double lipschitz_bound = 0.0;    // a-priori contraction constant
  double M = 0.0;                  // iterate-norm cap, twice the data norm
  double T0_bound = 0.0;           // admissible horizon for this data
  bool converged = false;
};

struct ScatteringData {
  std::vector<double> X_grid, k_grid;
  std::vector<double> checkpoint_times;
  std::vector<double> checkpoint_norms;  // sup_k int |J(t) - J_inf| dX
  std::vector<cplx> J_infinity, wave_op;  // row-major [iX * nk + ik]
  double tail_bound = 0.0;
  double decay_exponent = 0.0;  // fitted power of int |X n| dX
  double sup_k_int_J = 0.0;
};

/// Free-evolution density: a shear-line lookup of w0_check.
cplx free_density(const InitialData& w0, const PhysicalParams& par, double X, double t);

/// March the second-kind Volterra equation n = n_free + int_0^t h(t-s) n(s) ds
/// by the product trapezoidal rule on a uniform grid.  The kernel must be
/// tabulated on the same grid.
std::vector<cplx> solve_volterra(const KernelTable& kernel, const std::vector<cplx>& n_free,
                                 const std::vector<double>& t_grid, const SolverConfig& cfg = {});

/// Solve the density on a rectangle of (X,t), one Volterra column per X.
DensityTrace density_trace(const InitialData& w0, const Spectrum& P, const PhysicalParams& par,
                           std::vector<double> X_grid, std::vector<double> t_grid,
                           const SolverConfig& cfg = {});

/// Kernel assembled from the trapezoidal k-grid sum instead of the exact
/// transform, so that densities and k-integrals of the reconstructed field
/// agree to rounding.
KernelTable discrete_kernel(const Spectrum& P, const PhysicalParams& par, double X,
                            const std::vector<double>& k_grid, const std::vector<double>& t_grid);

/// density_trace with the discrete kernel and the matching discrete free
/// density sum over k_grid.
DensityTrace density_trace_discrete(const InitialData& w0, const Spectrum& P,
                                    const PhysicalParams& par, std::vector<double> X_grid,
                                    const std::vector<double>& k_grid, std::vector<double> t_grid,
                                    const SolverConfig& cfg = {});

/// Discrete space-time L2 norms of X^a t^b n (and n_free) with a
/// coarsened-grid error estimate; results are also stored in trace.norms.
std::vector<NormEntry> weighted_norms(DensityTrace& trace,
                                      const std::vector<std::pair<double, double>>& exponents);

/// Mild-form reconstruction of f from the solved density.
PhaseSpaceField reconstruct_f(const InitialData& f0, const Spectrum& P, const PhysicalParams& par,
                              const DensityTrace& trace, const std::vector<double>& k_grid,
                              const SolverConfig& cfg = {});

/// Fixed-point iteration of the nonlinear mild map on [0, T0].
PhaseSpaceField picard_solve(const InitialData& f0, const Spectrum& P, const PhysicalParams& par,
                             double T0, double tol, const std::vector<double>& X_grid,
                             const std::vector<double>& k_grid, std::size_t nt,
                             PicardReport& report, const SolverConfig& cfg = {},
                             const PhaseSpaceField* initial = nullptr);

/// Accumulate J(X,k,t) to T_max, take J_inf = J(T_max), and bound the tail
/// from the fitted decay of int |X n| dX.
ScatteringData scattering_limit(const InitialData& f0, const Spectrum& P,
                                const PhysicalParams& par, const DensityTrace& trace, double T_max,
                                const std::vector<double>& k_grid, double tail_tol,
                                const SolverConfig& cfg = {});

}  // namespace alber
