// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include "bvpop/population.hpp"
#include "oracles.hpp"

using namespace bvpop;

namespace {

constexpr std::uint64_t kSeed = 20240611;

int failures = 0;

void report(int n, bool ok, std::string detail) {
  while (!detail.empty() && (detail.back() == ' ' || detail.back() == ';')) detail.pop_back();
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string csv(const SuiteReport& r) {
  std::ostringstream os;
  write_suite_csv(r, os);
  return os.str();
}

struct Tally {
  std::size_t count = 0, passed = 0;
  double worst = kInf;
};

std::map<std::string, Tally> tally(const SuiteReport& r, std::uint64_t max_instance) {
  std::map<std::string, Tally> t;
  for (const SuiteRow& row : r.rows) {
    if (row.instance >= max_instance) continue;
    Tally& x = t[row.property];
    ++x.count;
    x.passed += row.pass;
    x.worst = std::min(x.worst, row.margin);
  }
  return t;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v + 0.0);  // no "-0"
  return buf;
}

bool all_pass(const std::map<std::string, Tally>& t, const std::string& prop, std::string& detail) {
  auto it = t.find(prop);
  if (it == t.end()) {
    detail += prop + " missing; ";
    return false;
  }
  detail += prop + " " + std::to_string(it->second.passed) + "/" + std::to_string(it->second.count) +
            " (worst margin " + fmt("%.3g", it->second.worst) + "); ";
  return it->second.count > 0 && it->second.passed == it->second.count;
}

VitalRates crowding(double beta0) {
  VitalRates r{RateSpec(GridFn::constant(beta0)), RateSpec(GridFn::constant(1.0)), RateSpec(GridFn::constant(1.0))};
  r.mu.modulation = {Response::linear_up, 1.0, EnvironmentKernel::total()};
  return r;
}

double l1_to_equilibrium(const Density& u) {
  const GridFn& f = u.fn();
  auto gap = [&](double x) { return std::abs(f.eval(x) - 2.0 * std::exp(-2.0 * x)); };
  return oracle::simpson(gap, 0.0, f.last_node(), 400000) +
         oracle::simpson(gap, f.last_node(), f.last_node() + 20.0, 2000);
}

}  // namespace

int main() {
  // 1, 2, 4 share one property-suite run
  const auto t0 = std::chrono::steady_clock::now();
  const SuiteReport suite = run_property_suite(200, kSeed);
  const double suite_time = seconds_since(t0);
  const auto all = tally(suite, 200);

  {
    std::string d;
    const bool ok = all_pass(all, "by_parts", d) && suite_time < 10.0;
    report(1, ok, d + "runtime " + fmt("%.2f", suite_time) + " s");
  }
  {
    std::string d;
    const bool a = all_pass(all, "prop1_strict", d);
    const bool b = all_pass(all, "prop1_constant_H", d);
    report(2, a && b, d);
  }
  {
    const MonotoneFn h(GridFn::sample(
                           [] {
                             std::vector<double> xs(15001);
                             for (int i = 0; i <= 15000; ++i) xs[i] = i * 1e-3;
                             return xs;
                           }(),
                           [](double x) { return 1.0 - std::exp(-x); }, TailSpec::exponential(1.0, 1.0)),
                       Direction::increasing);
    bool ok = true;
    double prev = kInf, worst = 0.0;
    for (double c : {0.5, 1.0, 2.0, 5.0}) {
      const double I = functional_I(h, GridFn::constant(c)).value;
      worst = std::max(worst, std::abs(I - 1.0 / (c + 1.0)));
      ok = ok && std::abs(I - 1.0 / (c + 1.0)) < 1e-6 && I < prev;
      prev = I;
    }
    report(3, ok, "max |I - 1/(c+1)| = " + fmt("%.3g", worst) + ", strictly decreasing in c");
  }
  {
    const auto first = tally(suite, 100);
    std::string d;
    bool ok = true;
    for (const char* p : {"hm_inv_p:0.25", "hm_inv_p:0.5", "hm_inv_p:0.75", "hm_inv_p:1", "hm_equality_p1",
                          "hm_inv_p:2", "hm_inv_p:4"})
      ok = all_pass(first, p, d) && ok;
    d += "reported only:";
    for (const char* p : {"hm_pow_p:0.25", "hm_pow_p:0.5", "hm_pow_p:0.75", "hm_pow_p:2", "hm_pow_p:4"}) {
      auto it = first.find(p);
      if (it != first.end())
        d += std::string(" ") + p + " " + std::to_string(it->second.passed) + "/" + std::to_string(it->second.count);
    }
    report(4, ok, d);
  }
  {
    Rng rng(kSeed);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double b = rng.uniform(0.1, 5.0), m = rng.uniform(0.1, 5.0), g = rng.uniform(0.1, 5.0);
      const VitalRates r{RateSpec(GridFn::constant(b)), RateSpec(GridFn::constant(m)), RateSpec(GridFn::constant(g))};
      worst = std::max(worst, std::abs(net_reproduction_R(Density::zero(), r).value - b / m));
    }
    report(5, worst < 1e-6, "max |R - beta0/mu0| over 20 triples = " + fmt("%.3g", worst));
  }

  EquilibriumResult eq;
  {
    const auto t1 = std::chrono::steady_clock::now();
    eq = solve_equilibrium(crowding(2.0), {}, {}, {0.0, 100.0});
    const double dt = seconds_since(t1);
    const double l1 = eq.u_star ? l1_to_equilibrium(*eq.u_star) : kInf;
    const bool ok = eq.converged && std::abs(eq.B_star - 2.0) < 1e-4 && l1 < 1e-4 &&
                    std::abs(eq.R_at_star - 1.0) < 1e-6 && dt < 5.0;
    report(6, ok, "B* = " + fmt("%.10g", eq.B_star) + ", L1 = " + fmt("%.3g", l1) + ", |R(u*) - 1| = " +
                      fmt("%.3g", std::abs(eq.R_at_star - 1.0)) + ", " + fmt("%.2f", dt) + " s");
  }
  {
    const ThresholdReport lo = threshold_report(crowding(0.5));
    const EquilibriumResult lo_eq = solve_equilibrium(crowding(0.5), {}, {}, {0.0, 100.0});
    const ThresholdReport hi = threshold_report(crowding(2.0));
    const bool ok = lo.conclusion == ThresholdReport::Conclusion::excluded &&
                    lo_eq.status == EquilibriumResult::Status::no_crossing &&
                    hi.conclusion == ThresholdReport::Conclusion::expected &&
                    eq.status == EquilibriumResult::Status::converged;
    report(7, ok, "beta0 = 0.5: " + lo.message + ", solver " + std::string(to_string(lo_eq.status)) +
                      "; beta0 = 2: " + hi.message + ", solver " + std::string(to_string(eq.status)));
  }

  const SuiteReport rmono = run_R_monotone_suite(100, kSeed);
  {
    std::string d;
    const bool ok = all_pass(tally(rmono, 100), "R_monotone", d) && !rmono.failed;
    report(8, ok, d);
  }
  {
    const bool same_props = csv(run_property_suite(200, kSeed)) == csv(suite);
    const bool same_r = csv(run_R_monotone_suite(100, kSeed)) == csv(rmono);
    report(9, same_props && same_r,
           std::string("property suite CSV ") + (same_props ? "identical" : "differs") + ", R suite CSV " +
               (same_r ? "identical" : "differs"));
  }
  return failures == 0 ? 0 : 1;
}
