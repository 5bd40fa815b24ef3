#include "alber/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "alber/common.hpp"

namespace alber {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto a = field.find_first_not_of(" \t\r");
    const auto b = field.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
  }
  return out;
}

double parse_number(const std::string& s, const std::string& path, int lineno,
                    const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(v))
    throw ConfigError("load_scatter: '" + path + "' line " + std::to_string(lineno) +
                      ": bad " + what + " '" + s + "'");
  return v;
}

}  // namespace

ScatterDiagram load_scatter(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_scatter: cannot open '" + path + "'");
  ScatterDiagram d;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv(line);
    if (!header_seen) {
      if (f != std::vector<std::string>{"hs", "t", "period_kind", "count"})
        throw ConfigError("load_scatter: '" + path + "' line " + std::to_string(lineno) +
                          ": expected header 'hs,t,period_kind,count'");
      header_seen = true;
      continue;
    }
    if (f.size() != 4)
      throw ConfigError("load_scatter: '" + path + "' line " + std::to_string(lineno) +
                        ": expected 4 fields, got " + std::to_string(f.size()));
    SeaState s;
    s.hs = parse_number(f[0], path, lineno, "hs");
    s.t = parse_number(f[1], path, lineno, "t");
    if (f[2] == "tz")
      s.kind = PeriodKind::Tz;
    else if (f[2] == "tp")
      s.kind = PeriodKind::Tp;
    else
      throw ConfigError("load_scatter: '" + path + "' line " + std::to_string(lineno) +
                        ": period_kind must be 'tz' or 'tp'");
    s.count = parse_number(f[3], path, lineno, "count");
    if (s.count < 0.0)
      throw ConfigError("load_scatter: '" + path + "' line " + std::to_string(lineno) +
                        ": negative count");
    s.validate();
    d.states.push_back(s);
    d.total_count += s.count;
  }
  if (!header_seen) throw ConfigError("load_scatter: '" + path + "' is empty");
  if (d.states.empty())
    throw ConfigError("load_scatter: '" + path + "' contains no sea states");
  if (!(d.total_count > 0.0))
    throw ConfigError("load_scatter: '" + path + "' has zero total count");
  return d;
}

LikelihoodReport analyze(const ScatterDiagram& diagram, const FitConfig& fit_cfg,
                         const StabilityConfig& stability_cfg, const ScatterConfig& cfg) {
  if (diagram.states.empty()) throw ConfigError("analyze: empty scatter diagram");
  if (!(cfg.gamma_quantum > 0.0) || !(cfg.alpha_quantum > 0.0))
    throw ConfigError("analyze: quanta must be positive");

  LikelihoodReport rep;
  rep.total_count = diagram.total_count;
  rep.practice = fit_cfg.practice;
  rep.verdicts.resize(diagram.states.size());

  // Fit every state, then run stability once per quantized (gamma, alpha)
  // cell; scatter diagrams cluster heavily around a few sea states.
  using Key = std::pair<long, long>;
  std::map<Key, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < diagram.states.size(); ++i) {
    StateVerdict& v = rep.verdicts[i];
    v.state = diagram.states[i];
    try {
      v.fit = fit_sea_state(diagram.states[i], fit_cfg);
      const Key key{std::lround(v.fit.gamma / cfg.gamma_quantum),
                    std::lround(v.fit.alpha / cfg.alpha_quantum)};
      cells[key].push_back(i);
    } catch (const std::exception& e) {
      v.failed = true;
      v.error = e.what();
      ++rep.failed_states;
    }
  }

  std::vector<Key> keys;
  keys.reserve(cells.size());
  for (const auto& [k, _] : cells) keys.push_back(k);
  struct CellOut {
    bool unstable = false;
    double kappa = 0.0;
    std::string error;
    bool failed = false;
  };
  std::vector<CellOut> outs(keys.size());
  StabilityConfig cell_cfg = stability_cfg;
  cell_cfg.workers = 1;
  cell_cfg.observer = nullptr;
  const PhysicalParams par;
  parallel_for(keys.size(), cfg.workers, [&](std::size_t ic) {
    const double gamma = static_cast<double>(keys[ic].first) * cfg.gamma_quantum;
    const double alpha = static_cast<double>(keys[ic].second) * cfg.alpha_quantum;
    if (alpha <= 0.0) {  // quantized to an empty sea; trivially stable
      outs[ic].kappa = 1.0;
      return;
    }
    try {
      JonswapParams jp;
      jp.alpha = alpha;
      jp.gamma = gamma;
      jp.k0 = 1.0;  // fitted shape is already in carrier-rescaled form
      const Spectrum P = Spectrum::jonswap(jp);
      const StabilityVerdict verdict = is_unstable(P, par, {}, cell_cfg);
      outs[ic].unstable = verdict.unstable;
      outs[ic].kappa = verdict.kappa_estimate;
    } catch (const std::exception& e) {
      outs[ic].failed = true;
      outs[ic].error = e.what();
    }
  });

  double unstable_count = 0.0;
  for (std::size_t ic = 0; ic < keys.size(); ++ic) {
    for (std::size_t i : cells[keys[ic]]) {
      StateVerdict& v = rep.verdicts[i];
      if (outs[ic].failed) {
        v.failed = true;
        v.error = outs[ic].error;
        ++rep.failed_states;
        continue;
      }
      v.unstable = outs[ic].unstable;
      v.kappa = outs[ic].kappa;
      if (v.unstable) unstable_count += v.state.count;
    }
  }
  rep.unstable_likelihood = unstable_count / diagram.total_count;
  return rep;
}

std::string star_plot_csv(const LikelihoodReport& report) {
  std::ostringstream out;
  out << "gamma,alpha,count,unstable\n";
  out.precision(10);
  for (const auto& v : report.verdicts) {
    if (v.failed) continue;
    out << v.fit.gamma << ',' << v.fit.alpha << ',' << v.state.count << ','
        << (v.unstable ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace alber
