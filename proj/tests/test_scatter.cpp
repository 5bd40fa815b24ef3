#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"

#include "alber/scatter.hpp"

using namespace alber;

#ifndef ALBER_DATA_DIR
#define ALBER_DATA_DIR "."
#endif

namespace {

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  f << body;
}

}  // namespace

TEST_CASE("load_scatter: happy path with comments and both period kinds") {
  const std::string path = "scatter_ok_test.csv";
  write_file(path,
             "hs,t,period_kind,count\n"
             "# a comment\n"
             "3.5,8.5,tz,120\n"
             "9.5,11.5,tp,4\n");
  const ScatterDiagram d = load_scatter(path);
  REQUIRE(d.states.size() == 2);
  CHECK(d.total_count == doctest::Approx(124.0));
  CHECK(d.states[0].kind == PeriodKind::Tz);
  CHECK(d.states[1].kind == PeriodKind::Tp);
  CHECK(d.states[1].hs == 9.5);
  std::remove(path.c_str());
}

TEST_CASE("load_scatter: malformed rows fail with line numbers") {
  const std::string path = "scatter_bad_test.csv";
  write_file(path, "hs,t,period_kind,count\n3.5,8.5,tz,120\n4.5,oops,tz,3\n");
  try {
    (void)load_scatter(path);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  write_file(path, "hs,period,kind,count\n");
  CHECK_THROWS_AS((void)load_scatter(path), ConfigError);
  write_file(path, "hs,t,period_kind,count\n3.5,8.5,monthly,12\n");
  CHECK_THROWS_AS((void)load_scatter(path), ConfigError);
  write_file(path, "hs,t,period_kind,count\n-1,8.5,tz,12\n");
  CHECK_THROWS_AS((void)load_scatter(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("bundled north atlantic diagram totals 100000") {
  const ScatterDiagram d = load_scatter(std::string(ALBER_DATA_DIR) + "/north_atlantic_scatter.csv");
  CHECK(d.total_count == doctest::Approx(100000.0));
  CHECK(d.states.size() > 100);
  for (const SeaState& s : d.states) {
    CHECK(s.hs > 0.0);
    CHECK(s.t > 0.0);
    CHECK(s.count > 0.0);
  }
}

TEST_CASE("a calm diagram has zero unstable likelihood") {
  ScatterDiagram d;
  for (double hs : {0.5, 1.0, 1.5}) {
    SeaState s;
    s.hs = hs;
    s.t = 10.0;
    s.kind = PeriodKind::Tz;
    s.count = 100.0;
    d.states.push_back(s);
    d.total_count += s.count;
  }
  const LikelihoodReport r = analyze(d, {}, {});
  CHECK(r.unstable_likelihood == 0.0);
  CHECK(r.failed_states == 0);
  for (const StateVerdict& v : r.verdicts) {
    CHECK(!v.unstable);
    CHECK(v.kappa > 0.0);
  }
}

TEST_CASE("one synthetic extreme state carries exactly its count fraction") {
  ScatterDiagram d;
  SeaState calm;
  calm.hs = 1.0;
  calm.t = 10.0;
  calm.kind = PeriodKind::Tz;
  calm.count = 99800.0;
  SeaState wild;
  wild.hs = 20.0;
  wild.t = 12.0;
  wild.kind = PeriodKind::Tp;
  wild.count = 200.0;
  d.states = {calm, wild};
  d.total_count = 100000.0;
  const LikelihoodReport r = analyze(d, {}, {});
  REQUIRE(r.verdicts.size() == 2);
  CHECK(!r.verdicts[0].unstable);
  CHECK(r.verdicts[1].unstable);
  CHECK(r.unstable_likelihood == doctest::Approx(2e-3));
  // permutation invariance of the likelihood
  std::swap(d.states[0], d.states[1]);
  CHECK(analyze(d, {}, {}).unstable_likelihood == doctest::Approx(2e-3));
  // splitting a state's count across two rows changes nothing
  d.states = {calm, wild, wild};
  d.states[1].count = 80.0;
  d.states[2].count = 120.0;
  CHECK(analyze(d, {}, {}).unstable_likelihood == doctest::Approx(2e-3));
}

TEST_CASE("parallel analysis matches the serial reference") {
  ScatterDiagram d;
  for (double hs : {2.0, 6.0, 12.0, 20.0}) {
    SeaState s;
    s.hs = hs;
    s.t = 3.8 * std::sqrt(hs);
    s.kind = PeriodKind::Tp;
    s.count = 10.0;
    d.states.push_back(s);
    d.total_count += 10.0;
  }
  ScatterConfig serial, par;
  par.workers = 4;
  const LikelihoodReport a = analyze(d, {}, {}, serial);
  const LikelihoodReport b = analyze(d, {}, {}, par);
  CHECK(a.unstable_likelihood == b.unstable_likelihood);
  REQUIRE(a.verdicts.size() == b.verdicts.size());
  for (std::size_t i = 0; i < a.verdicts.size(); ++i) {
    CHECK(a.verdicts[i].unstable == b.verdicts[i].unstable);
    CHECK(a.verdicts[i].kappa == b.verdicts[i].kappa);
  }
}

TEST_CASE("star plot csv has the expected header and row count") {
  ScatterDiagram d;
  SeaState s;
  s.hs = 2.0;
  s.t = 9.0;
  s.kind = PeriodKind::Tz;
  s.count = 50.0;
  d.states = {s};
  d.total_count = 50.0;
  const LikelihoodReport r = analyze(d, {}, {});
  const std::string csv = star_plot_csv(r);
  CHECK(csv.rfind("gamma,alpha,count,unstable\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}
