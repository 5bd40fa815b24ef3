// Command-line front end: stability verdicts, (gamma, alpha) scans, density
// simulations, and scatter-diagram likelihoods, with reproducible outputs.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "alber/common.hpp"
#include "alber/quadrature.hpp"
#include "alber/scatter.hpp"
#include "alber/solver.hpp"
#include "alber/spectrum.hpp"
#include "alber/stability.hpp"
#include "alber/transforms.hpp"

using nlohmann::json;
using namespace alber;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct RunConfig {
  std::string command;
  std::string jonswap;  // "k=v,..." spectrum parameters
  std::string table;    // spectrum table or scatter CSV path
  double p = 1.0 / (4.0 * pi);
  double q = 4.0 * pi;
  double epsilon = 0.0;
  double tol = 1e-4;      // Plemelj offset
  double on_tol = 1e-6;   // on-curve band
  double quad_rel_tol = 1e-9;
  std::string out = "out";
  int workers = 1;
  unsigned long seed = 12345;
  std::string curve_x;  // comma list of X values for curve output
  // scan grid
  double gamma_min = 1.0, gamma_max = 10.0;
  int gamma_count = 30;
  double alpha_min = 1e-3, alpha_max = 0.2;  // log-spaced
  int alpha_count = 30;
  // simulate grids and initial data
  double x_max = 2.0;
  int x_count = 41;
  double t_max = 50.0;
  double t_step = 0.05;
  double k_max = 6.0;
  int k_count = 121;
  double w0_amplitude = 1.0, w0_sigma_x = 1.0, w0_sigma_k = 1.0;
  std::string w0_table;
  double tail_tol = 0.0;  // > 0 enables the scattering stage

  std::vector<std::pair<std::string, std::string>> kv() const {
    return {
        {"command", command},
        {"jonswap", jonswap},
        {"table", table},
        {"p", fmt(p)},
        {"q", fmt(q)},
        {"epsilon", fmt(epsilon)},
        {"tol", fmt(tol)},
        {"on_tol", fmt(on_tol)},
        {"quad_rel_tol", fmt(quad_rel_tol)},
        {"out", out},
        {"workers", std::to_string(workers)},
        {"seed", std::to_string(seed)},
        {"curve_x", curve_x},
        {"gamma_min", fmt(gamma_min)},
        {"gamma_max", fmt(gamma_max)},
        {"gamma_count", std::to_string(gamma_count)},
        {"alpha_min", fmt(alpha_min)},
        {"alpha_max", fmt(alpha_max)},
        {"alpha_count", std::to_string(alpha_count)},
        {"x_max", fmt(x_max)},
        {"x_count", std::to_string(x_count)},
        {"t_max", fmt(t_max)},
        {"t_step", fmt(t_step)},
        {"k_max", fmt(k_max)},
        {"k_count", std::to_string(k_count)},
        {"w0_amplitude", fmt(w0_amplitude)},
        {"w0_sigma_x", fmt(w0_sigma_x)},
        {"w0_sigma_k", fmt(w0_sigma_k)},
        {"w0_table", w0_table},
        {"tail_tol", fmt(tail_tol)},
    };
  }

  void set(const std::string& key, const std::string& value) {
    auto num = [&] {
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
      } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value '" + value + "' for key '" + key + "'");
      }
    };
    auto integer = [&] { return static_cast<int>(std::llround(num())); };
    if (key == "command") command = value;
    else if (key == "jonswap") jonswap = value;
    else if (key == "table") table = value;
    else if (key == "p") p = num();
    else if (key == "q") q = num();
    else if (key == "epsilon") epsilon = num();
    else if (key == "tol") tol = num();
    else if (key == "on_tol") on_tol = num();
    else if (key == "quad_rel_tol") quad_rel_tol = num();
    else if (key == "out") out = value;
    else if (key == "workers") workers = integer();
    else if (key == "seed") seed = static_cast<unsigned long>(integer());
    else if (key == "curve_x") curve_x = value;
    else if (key == "gamma_min") gamma_min = num();
    else if (key == "gamma_max") gamma_max = num();
    else if (key == "gamma_count") gamma_count = integer();
    else if (key == "alpha_min") alpha_min = num();
    else if (key == "alpha_max") alpha_max = num();
    else if (key == "alpha_count") alpha_count = integer();
    else if (key == "x_max") x_max = num();
    else if (key == "x_count") x_count = integer();
    else if (key == "t_max") t_max = num();
    else if (key == "t_step") t_step = num();
    else if (key == "k_max") k_max = num();
    else if (key == "k_count") k_count = integer();
    else if (key == "w0_amplitude") w0_amplitude = num();
    else if (key == "w0_sigma_x") w0_sigma_x = num();
    else if (key == "w0_sigma_k") w0_sigma_k = num();
    else if (key == "w0_table") w0_table = value;
    else if (key == "tail_tol") tail_tol = num();
    else throw ConfigError("config: unknown key '" + key + "'");
  }

  void validate() const {
    if (!(tol > 0.0) || !(on_tol > 0.0) || !(quad_rel_tol > 0.0))
      throw ConfigError("config: tolerances must be positive");
    if (workers < 1) throw ConfigError("config: workers must be >= 1");
    if (gamma_count < 1 || alpha_count < 1 || x_count < 2 || k_count < 2)
      throw ConfigError("config: grid counts too small");
    if (!(t_step > 0.0) || !(t_max > t_step)) throw ConfigError("config: bad time grid");
  }
};

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: '" + path + "' line " + std::to_string(lineno) +
                        ": expected key=value");
    auto trim = [](std::string s) {
      const auto x = s.find_first_not_of(" \t\r");
      const auto y = s.find_last_not_of(" \t\r");
      return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
    };
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

JonswapParams parse_jonswap(const std::string& s) {
  JonswapParams jp;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("jonswap: expected k=v, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("jonswap: bad value in '" + item + "'");
    }
    if (key == "alpha") jp.alpha = v;
    else if (key == "gamma") jp.gamma = v;
    else if (key == "k0") jp.k0 = v;
    else if (key == "delta_low") jp.delta_low = v;
    else if (key == "delta_high") jp.delta_high = v;
    else throw ConfigError("jonswap: unknown parameter '" + key + "'");
  }
  return jp;
}

// Unit-carrier spectrum from the configured source.
Spectrum make_spectrum(const RunConfig& cfg) {
  if (!cfg.jonswap.empty() && !cfg.table.empty())
    throw ConfigError("config: give either --jonswap or --table, not both");
  if (!cfg.jonswap.empty()) {
    const JonswapParams jp = parse_jonswap(cfg.jonswap);
    return rescale_unit_carrier(Spectrum::jonswap(jp), jp.k0);
  }
  if (!cfg.table.empty()) {
    const Spectrum raw = Spectrum::load_table(cfg.table);
    return rescale_unit_carrier(raw, raw.peak_k());
  }
  throw ConfigError("config: no spectrum given (--jonswap or --table)");
}

PhysicalParams make_params(const RunConfig& cfg) {
  PhysicalParams par;
  par.p = cfg.p;
  par.q = cfg.q;
  par.epsilon = cfg.epsilon;
  par.validate();
  return par;
}

StabilityConfig make_stability(const RunConfig& cfg) {
  StabilityConfig s;
  s.plemelj_tol = cfg.tol;
  s.on_tol = cfg.on_tol;
  s.workers = cfg.workers;
  return s;
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.kv()) j[k] = v;
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
}

void write_json(const RunConfig& cfg, const std::string& name, json doc) {
  doc["config"] = config_json(cfg);
  const std::string payload = doc.dump(2);
  doc["content_hash"] = std::to_string(fnv1a64(payload));
  write_file((std::filesystem::path(cfg.out) / name).string(), doc.dump(2) + "\n");
}

void write_csv(const RunConfig& cfg, const std::string& name, const std::string& payload) {
  std::string head;
  for (const auto& [k, v] : cfg.kv()) head += "# " + k + "=" + v + "\n";
  head += "# content_hash=" + std::to_string(fnv1a64(payload)) + "\n";
  write_file((std::filesystem::path(cfg.out) / name).string(), head + payload);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::string curve_csv(const ContourCurve& c) {
  std::string s = "t,re,im\n";
  for (std::size_t i = 0; i < c.points.size(); ++i)
    s += fmt12(c.t_nodes[i]) + "," + fmt12(c.points[i].real()) + "," +
         fmt12(c.points[i].imag()) + "\n";
  return s;
}

int cmd_stability(const RunConfig& cfg) {
  const Spectrum P = make_spectrum(cfg);
  const PhysicalParams par = make_params(cfg);
  const StabilityConfig scfg = make_stability(cfg);
  const StabilityVerdict v = is_unstable(P, par, {}, scfg);

  json doc;
  doc["verdict"] = v.unstable ? "unstable" : "stable";
  doc["kappa"] = v.kappa_estimate;
  doc["target"] = v.target;
  doc["x_max"] = v.x_max;
  doc["unstable_X"] = json::array();
  for (const auto& iv : v.unstable_X)
    doc["unstable_X"].push_back({{"lo", iv.lo}, {"hi", iv.hi}});
  write_json(cfg, "verdict.json", doc);

  std::string spans = "X,re_min,re_max\n";
  for (const auto& w : v.witnesses)
    if (w.traced)
      spans += fmt12(w.X) + "," + fmt12(w.re_min) + "," + fmt12(w.re_max) + "\n";
  write_csv(cfg, "spans.csv", spans);

  std::vector<double> xs = parse_list(cfg.curve_x);
  if (xs.empty()) {
    for (const auto& iv : v.unstable_X)
      if (iv.hi > 0.0) xs.push_back(std::max(iv.lo, 0.0) + iv.width() / 2.0);
    if (xs.empty()) xs.push_back(1.0);
  }
  const Interval core = P.is_zero() ? Interval{-1.0, 1.0} : P.effective_support(1e-3);
  for (double X : xs) {
    if (X == 0.0) continue;
    // widen the window until the trace endpoints are negligible
    ContourCurve c;
    for (double margin = std::abs(X) + 1.0;; margin *= 2.0) {
      const Interval win = core.inflated(margin);
      std::vector<double> ts = graded_grid(win.lo, win.hi, core.lo, core.hi, 800, 100);
      try {
        c = gamma_curve(P, par, X, ts, cfg.tol, scfg);
        break;
      } catch (const NumericalError&) {
        if (margin > 1e6) throw;
      }
    }
    char name[64];
    std::snprintf(name, sizeof name, "curve_X%.4f.csv", X);
    write_csv(cfg, name, curve_csv(c));
  }
  std::printf("%s kappa=%.6g\n", v.unstable ? "unstable" : "stable", v.kappa_estimate);
  return 0;
}

int cmd_scan(const RunConfig& cfg) {
  std::vector<double> gammas, alphas;
  for (int i = 0; i < cfg.gamma_count; ++i)
    gammas.push_back(cfg.gamma_count == 1
                         ? cfg.gamma_min
                         : cfg.gamma_min + (cfg.gamma_max - cfg.gamma_min) * i /
                               (cfg.gamma_count - 1));
  for (int i = 0; i < cfg.alpha_count; ++i)
    alphas.push_back(cfg.alpha_count == 1
                         ? cfg.alpha_min
                         : cfg.alpha_min * std::pow(cfg.alpha_max / cfg.alpha_min,
                                                    double(i) / (cfg.alpha_count - 1)));
  const PhysicalParams par = make_params(cfg);
  const ScanResult r = scan_plane(gammas, alphas, 1.0, par, make_stability(cfg));

  std::string csv = "gamma,alpha,unstable,kappa,bandwidth_lo,bandwidth_hi\n";
  int unstable = 0, errors = 0;
  for (const auto& c : r.cells) {
    csv += fmt12(c.gamma) + "," + fmt12(c.alpha) + "," + std::to_string(c.status == 1 ? 1 : 0) +
           "," + fmt12(c.kappa) + "," + fmt12(c.bandwidth.lo) + "," + fmt12(c.bandwidth.hi) +
           "\n";
    unstable += c.status == 1;
    errors += c.status == -1;
  }
  write_csv(cfg, "scan.csv", csv);

  // Steepness separatrices: alpha_C(gamma) = 2 C^2 I(gamma) / gamma^2, with
  // I the integral of the unit-alpha shape (rms-amplitude steepness rule).
  std::string sep = "gamma,alpha_c077,alpha_c0974\n";
  for (double g : gammas) {
    JonswapParams jp;
    jp.alpha = 1.0;
    jp.gamma = g;
    const double I = Spectrum::jonswap(jp).integral();
    auto riser = [&](double C) { return 2.0 * C * C * I / (g * g); };
    sep += fmt12(g) + "," + fmt12(riser(0.77)) + "," + fmt12(riser(0.974)) + "\n";
  }
  write_csv(cfg, "separatrices.csv", sep);

  json doc;
  doc["cells"] = r.cells.size();
  doc["unstable"] = unstable;
  doc["errors"] = errors;
  write_json(cfg, "scan.json", doc);
  std::printf("scan: %zu cells, %d unstable, %d errors\n", r.cells.size(), unstable, errors);
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  Spectrum P;  // zero unless a source is given
  if (!cfg.jonswap.empty() || !cfg.table.empty()) P = make_spectrum(cfg);
  const PhysicalParams par = make_params(cfg);
  const InitialData w0 =
      cfg.w0_table.empty()
          ? InitialData::gaussian(cfg.w0_amplitude, cfg.w0_sigma_x, cfg.w0_sigma_k)
          : InitialData::load_table(cfg.w0_table);

  std::vector<double> Xg, tg, kg;
  for (int i = 0; i < cfg.x_count; ++i)
    Xg.push_back(-cfg.x_max + 2.0 * cfg.x_max * i / (cfg.x_count - 1));
  const int nt = static_cast<int>(std::floor(cfg.t_max / cfg.t_step + 1e-9)) + 1;
  for (int i = 0; i < nt; ++i) tg.push_back(cfg.t_step * i);
  for (int i = 0; i < cfg.k_count; ++i)
    kg.push_back(-cfg.k_max + 2.0 * cfg.k_max * i / (cfg.k_count - 1));

  SolverConfig sol;
  sol.workers = cfg.workers;
  DensityTrace tr = density_trace(w0, P, par, Xg, tg, sol);
  const auto norms = weighted_norms(tr, {{1.0, 0.0}, {1.4, 1.0}, {2.1, 0.0}});

  std::string csv = "X,t,re_n,im_n,re_nf,im_nf\n";
  for (std::size_t i = 0; i < Xg.size(); ++i)
    for (std::size_t j = 0; j < tg.size(); ++j) {
      const cplx n = tr.at(i, j), nf = tr.free_at(i, j);
      csv += fmt12(Xg[i]) + "," + fmt12(tg[j]) + "," + fmt12(n.real()) + "," +
             fmt12(n.imag()) + "," + fmt12(nf.real()) + "," + fmt12(nf.imag()) + "\n";
    }
  write_csv(cfg, "trace.csv", csv);

  json jn = json::array();
  for (const auto& e : norms)
    jn.push_back({{"a", e.a},
                  {"b", e.b},
                  {"n", e.value_n},
                  {"n_free", e.value_free},
                  {"est_error_n", e.est_error_n},
                  {"est_error_free", e.est_error_free}});
  write_json(cfg, "norms.json", json{{"norms", jn}});

  // Growth flag: the half-window X-weighted norm at T against T/2.
  auto xnorm_to = [&](std::size_t jmax) {
    double s = 0.0;
    const std::vector<double> wX = trapezoid_weights(Xg);
    for (std::size_t i = 0; i < Xg.size(); ++i)
      for (std::size_t j = 0; j <= jmax; ++j) {
        const double wt = (j == 0 || j == jmax) ? cfg.t_step / 2 : cfg.t_step;
        s += wX[i] * wt * Xg[i] * Xg[i] * std::norm(tr.at(i, j));
      }
    return std::sqrt(s);
  };
  const double half = xnorm_to(tr.nt() / 2), full = xnorm_to(tr.nt() - 1);
  json doc;
  doc["xnorm_half"] = half;
  doc["xnorm_full"] = full;
  doc["growth_flag"] = full > 2.0 * half;

  if (cfg.tail_tol > 0.0) {
    const ScatteringData sc =
        scattering_limit(w0, P, par, tr, tg.back(), kg, cfg.tail_tol, sol);
    doc["scattering"] = {{"checkpoint_times", sc.checkpoint_times},
                         {"checkpoint_norms", sc.checkpoint_norms},
                         {"tail_bound", sc.tail_bound},
                         {"decay_exponent", sc.decay_exponent},
                         {"sup_k_int_J", sc.sup_k_int_J}};
  }
  write_json(cfg, "summary.json", doc);
  std::printf("simulate: %zu X, %zu t, growth_flag=%d\n", Xg.size(), tg.size(),
              int(full > 2.0 * half));
  return 0;
}

int cmd_scatter(const RunConfig& cfg) {
  if (cfg.table.empty()) throw ConfigError("scatter: need --table with a scatter CSV");
  const ScatterDiagram d = load_scatter(cfg.table);
  ScatterConfig sc;
  sc.workers = cfg.workers;
  const LikelihoodReport rep = analyze(d, FitConfig{}, make_stability(cfg), sc);

  json states = json::array();
  for (const auto& v : rep.verdicts)
    states.push_back({{"hs", v.state.hs},
                      {"t", v.state.t},
                      {"count", v.state.count},
                      {"gamma", v.fit.gamma},
                      {"alpha", v.fit.alpha},
                      {"unstable", v.unstable},
                      {"kappa", v.kappa},
                      {"failed", v.failed},
                      {"error", v.error}});
  json doc;
  doc["unstable_likelihood"] = rep.unstable_likelihood;
  doc["total_count"] = rep.total_count;
  doc["failed_states"] = rep.failed_states;
  doc["practice"] = rep.practice;
  doc["states"] = states;
  write_json(cfg, "report.json", doc);
  write_csv(cfg, "stars.csv", star_plot_csv(rep));
  std::printf("scatter: likelihood %.6g (%d failed states)\n", rep.unstable_likelihood,
              rep.failed_states);
  return 0;
}

int cmd_selftest(const RunConfig& cfg) {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
    failures += !ok;
  };
  {  // box-function closed form
    CompactFunction box{[](double) { return 1.0; }, {-1.0, 1.0}};
    const cplx got = hilbert_at(box, {2.0, 0.0}, {});
    check("hilbert box closed form", std::abs(got - cplx{std::log(3.0) / pi, 0.0}) < 1e-10);
  }
  {  // h_tilde(0, omega) = 0
    const Spectrum P = Spectrum::jonswap({});
    const cplx v = h_tilde(P, PhysicalParams{}, 0.0, {1.0, 1.0}, {});
    check("h_tilde vanishes at X=0", std::abs(v) == 0.0);
  }
  {  // Volterra manufactured solution with known forcing
    const double c = 0.8;
    auto run = [&](int n) {
      std::vector<double> t(n + 1);
      for (int i = 0; i <= n; ++i) t[i] = 2.0 * i / n;
      KernelTable ker;
      ker.X = 1.0;
      ker.times = t;
      for (double ti : t) ker.values.push_back({c * std::sin(ti) * std::exp(-ti), 0.0});
      std::vector<cplx> nf(t.size());
      for (std::size_t i = 0; i < t.size(); ++i)
        nf[i] = std::exp(-t[i]) * (1.0 - c * (1.0 - std::cos(t[i])));
      const auto n_sol = solve_volterra(ker, nf, t, {});
      double err = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i)
        err = std::max(err, std::abs(n_sol[i] - std::exp(-t[i])));
      return err;
    };
    const double e1 = run(100), e2 = run(200);
    check("volterra manufactured solution order", e1 / e2 > 3.5 && e1 / e2 < 4.5);
  }
  {  // Plemelj offsets converge monotonically to the real-axis limit
    CompactFunction bump{[](double x) { return std::exp(-1.0 / (1.0 - x * x)); },
                         {-1.0, 1.0}};
    const cplx limit = signal_transform(bump, 0.3, {});
    double prev = 1e300;
    bool mono = true;
    for (double eta : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
      const double d = std::abs(hilbert_at(bump, {0.3, -eta}, {}) - limit);
      mono = mono && d < prev;
      prev = d;
    }
    check("plemelj offset sweep monotone", mono);
  }
  (void)cfg;
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrum stability and density evolution toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  auto add_common = [&](CLI::App* sub) {
    auto track = [&overrides](const std::string& key) {
      return [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); };
    };
    sub->add_option_function<std::string>("--config", track("__config"),
                                          "key=value config file");
    sub->add_option_function<std::string>("--jonswap", track("jonswap"),
                                          "spectrum parameters k=v,...");
    sub->add_option_function<std::string>("--table", track("table"), "input table path");
    sub->add_option_function<std::string>("--p", track("p"), "dispersion coefficient");
    sub->add_option_function<std::string>("--q", track("q"), "nonlinearity coefficient");
    sub->add_option_function<std::string>("--epsilon", track("epsilon"),
                                          "inhomogeneity strength");
    sub->add_option_function<std::string>("--tol", track("tol"), "boundary offset");
    sub->add_option_function<std::string>("--out", track("out"), "output directory");
    sub->add_option_function<std::string>("--workers", track("workers"), "thread count");
    sub->add_option_function<std::vector<std::string>>(
           "--set",
           [&overrides](const std::vector<std::string>& vs) {
             for (const std::string& v : vs) overrides.emplace_back("__set", v);
           },
           "extra key=value override (repeatable)")
        ->take_all();
  };
  for (const char* name : {"stability", "scan", "simulate", "scatter", "selftest"})
    add_common(app.add_subcommand(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    // config file first, then flag overrides in command-line order
    for (const auto& [k, v] : overrides)
      if (k == "__config") load_config_file(cfg, v);
    for (const auto& [k, v] : overrides) {
      if (k == "__config") continue;
      if (k == "__set") {
        const auto eq = v.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value");
        cfg.set(v.substr(0, eq), v.substr(eq + 1));
      } else {
        cfg.set(k, v);
      }
    }
    cfg.validate();
    std::filesystem::create_directories(cfg.out);

    if (cfg.command == "stability") return cmd_stability(cfg);
    if (cfg.command == "scan") return cmd_scan(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "scatter") return cmd_scatter(cfg);
    return cmd_selftest(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
