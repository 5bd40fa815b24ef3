#pragma once

#include <string>
#include <vector>

#include "alber/spectrum.hpp"
#include "alber/stability.hpp"

namespace alber {

struct ScatterDiagram {
  std::vector<SeaState> states;
  double total_count = 0.0;
};

/// CSV with header `hs,t,period_kind,count`; '#' comments allowed.
ScatterDiagram load_scatter(const std::string& path);

struct StateVerdict {
  SeaState state;
  FitResult fit;
  bool unstable = false;
  double kappa = 0.0;
  bool failed = false;
  std::string error;
};

struct LikelihoodReport {
  std::vector<StateVerdict> verdicts;  // one per input state, input order
  double unstable_likelihood = 0.0;    // sum of unstable counts / total_count
  double total_count = 0.0;
  int failed_states = 0;               // excluded from the unstable sum
  std::string practice;
};

struct ScatterConfig {
  double gamma_quantum = 0.01;  // verdicts memoized on quantized (gamma, alpha)
  double alpha_quantum = 1e-4;
  int workers = 1;
};

LikelihoodReport analyze(const ScatterDiagram& diagram, const FitConfig& fit_cfg,
                         const StabilityConfig& stability_cfg, const ScatterConfig& cfg = {});

/// Star-plot rows `gamma,alpha,count,unstable`, one per analyzed state.
std::string star_plot_csv(const LikelihoodReport& report);

}  // namespace alber
