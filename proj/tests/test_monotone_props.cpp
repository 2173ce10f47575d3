#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bvpop/errors.hpp"
#include "bvpop/monotone_props.hpp"
#include "oracles.hpp"

using namespace bvpop;

namespace {

std::vector<double> uniform_nodes(double a, double b, int n) {
  std::vector<double> xs(n + 1);
  for (int i = 0; i <= n; ++i) xs[i] = a + (b - a) * i / n;
  xs.back() = b;
  return xs;
}

// h(x) = x cut off at 60 (e^-60 of the mass lies beyond) and g = e^-x.
struct HmExample {
  std::vector<double> xs = uniform_nodes(0.0, 60.0, 60000);
  MonotoneFn h{GridFn::sample(xs, [](double x) { return x; }, TailSpec::constant(60.0)), Direction::increasing};
  BVFn g{GridFn::sample(xs, [](double x) { return std::exp(-x); }, TailSpec::exponential(1.0, 0.0))};
};

const HmExample& hm_example() {
  static const HmExample ex;
  return ex;
}

bool same_fn(const GridFn& a, const GridFn& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.grid()[i] != b.grid()[i] || a.values()[i] != b.values()[i]) return false;
  return a.right_value() == b.right_value();
}

std::string csv_of(const SuiteReport& r) {
  std::ostringstream os;
  write_suite_csv(r, os);
  return os.str();
}

}  // namespace

TEST_CASE("gen_pair_A: ordered, in A, deterministic") {
  for (FamilyKind kind : {FamilyKind::exp_decay, FamilyKind::rational_decay, FamilyKind::piecewise_random}) {
    for (std::uint64_t seed : {1u, 2u, 77u}) {
      for (bool anchored : {false, true}) {
        const InstanceFamily fam{kind, seed, anchored};
        const auto [g1, g2] = gen_pair_A(fam);
        CHECK(g1.in_set_A());
        CHECK(g2.in_set_A());
        CHECK_NOTHROW(require_ordered(g1.base(), g2.base(), "pair"));
        // interior separation on the nodes of G1
        const auto xs = g1.base().grid();
        double min_gap = kInf;
        for (std::size_t i = 1; i + 1 < xs.size(); ++i) min_gap = std::min(min_gap, g2(xs[i]) - g1(xs[i]));
        CHECK(min_gap > 0.0);
        if (anchored) CHECK(std::abs(g2(xs[0]) - g1(xs[0])) < 1e-15);

        const auto [h1, h2] = gen_pair_A(fam);
        CHECK(same_fn(g1.base(), h1.base()));
        CHECK(same_fn(g2.base(), h2.base()));
      }
    }
  }
}

TEST_CASE("generated integrands have the requested monotonicity") {
  Rng rng(5);
  const auto [g1, g2] = gen_pair_A({FamilyKind::exp_decay, 3, false});
  for (IntegrandKind k : {IntegrandKind::saturating, IntegrandKind::rational_ramp, IntegrandKind::staircase}) {
    const MonotoneFn h = gen_increasing(k, rng, g1.base());
    CHECK(h.strict());
    CHECK(h.non_decreasing());
    CHECK(h.base().values()[0] >= 0.0);
  }
  const MonotoneFn d = gen_decreasing(rng, g1.base());
  CHECK(d.direction() == Direction::decreasing);
}

TEST_CASE("check_prop1 examples") {
  const MonotoneFn H(GridFn({0.0, 1.0}, {0.0, 1.0}), Direction::increasing);
  const BVFn G1(GridFn({0.0, 1.0}, {0.5, 0.0}));
  const BVFn G2(GridFn({0.0, 1.0}, {1.0, 0.0}));
  const Prop1Check c = check_prop1(H, G1, G2);
  CHECK(c.delta == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(c.strict_ok);
  CHECK(c.nonstrict_ok);

  // constant H and G1(a) = G2(a): F = c G(a) on both sides
  const MonotoneFn Hc(GridFn({0.0, 1.0}, {2.0, 2.0}), Direction::non_decreasing);
  const BVFn A1(GridFn({0.0, 0.5, 1.0}, {1.0, 0.4, 0.0}));
  const BVFn A2(GridFn({0.0, 0.5, 1.0}, {1.0, 0.6, 0.0}));
  const Prop1Check cc = check_prop1(Hc, A1, A2);
  CHECK(std::abs(cc.delta) < 1e-14);
  CHECK(cc.nonstrict_ok);
  CHECK_FALSE(cc.strict_ok);

  const Prop1Check same = check_prop1(H, G2, G2);
  CHECK(same.delta == 0.0);

  CHECK_THROWS_AS(check_prop1(H, G2, G1), PreconditionError);
}

TEST_CASE("power inequality at p = 1 is an equality") {
  const auto [g1, g2] = gen_pair_A({FamilyKind::piecewise_random, 9, false});
  Rng rng(9);
  const MonotoneFn h = gen_increasing(IntegrandKind::saturating, rng, g1.base());
  const HMReport r = hm_evaluate(h, g1, 1.0);
  CHECK(std::abs(r.lhs - r.rhs_inv_p) < 1e-12);
  CHECK(std::abs(r.lhs - r.rhs_pow_p) < 1e-12);
  CHECK(r.holds_inv_p);
}

TEST_CASE("power inequality with h = x, g = e^-x") {
  const HmExample& ex = hm_example();
  const double pi = std::numbers::pi;

  const HMReport half = hm_evaluate(ex.h, ex.g, 0.5);
  CHECK(std::abs(half.lhs - 1.0) < 1e-5);
  CHECK(std::abs(half.m - std::sqrt(pi / 2.0)) < 1e-4);
  CHECK(std::abs(half.rhs_inv_p - pi / 2.0) < 1e-4);
  CHECK(half.holds_inv_p);

  // quadrature oracle for m = int sqrt(x) (1/2) e^(-x/2) dx, substituting x = t^2
  const double m_oracle = oracle::simpson([](double t) { return t * t * std::exp(-t * t / 2.0); }, 0.0, 12.0, 20000);
  CHECK(std::abs(half.m - m_oracle) < 1e-4);

  // p = 2: lhs >= m^(1/2) with m = int x^2 2 e^-2x dx = 1/2
  const HMReport two = hm_evaluate(ex.h, ex.g, 2.0);
  CHECK(std::abs(two.m - 0.5) < 1e-5);
  CHECK(two.lhs >= two.rhs_inv_p);
  CHECK(two.holds_inv_p);
}

TEST_CASE("power inequality input errors") {
  const MonotoneFn h(GridFn({0.0, 1.0}, {0.0, 1.0}), Direction::increasing);
  const BVFn g(GridFn({0.0, 1.0}, {1.0, 0.0}));
  CHECK_THROWS_AS(hm_evaluate(h, g, 0.0), InvalidArgument);
  CHECK_THROWS_AS(hm_evaluate(h, g, -1.0), InvalidArgument);
  const MonotoneFn dec(GridFn({0.0, 1.0}, {1.0, 0.0}), Direction::decreasing);
  CHECK_THROWS_AS(hm_evaluate(dec, g, 0.5), PreconditionError);
  CHECK_THROWS_AS(hm_evaluate(h, BVFn(GridFn({0.0, 1.0}, {0.0, -1.0})), 0.5), PreconditionError);
  CHECK_THROWS_AS(hm_evaluate(h, BVFn(GridFn({0.0, 1.0}, {1.0, 0.5})), 0.5), PreconditionError);
}

TEST_CASE("power_transform maps exponential tails to exponential tails") {
  const GridFn f({0.0, 1.0}, {2.0, 1.0}, TailSpec::exponential(1.5, 0.0));
  const GridFn f2 = power_transform(f, 2.0, 8);
  REQUIRE(f2.tail().has_value());
  CHECK(f2.tail()->is_exponential());
  CHECK(f2.tail()->rate == doctest::Approx(3.0));
  CHECK(f2.size() == 8);
  CHECK(f2.eval(0.0) == doctest::Approx(4.0));
  CHECK(f2.eval(2.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(power_transform(GridFn({0.0, 1.0}, {1.0, -1.0}), 0.5, 8), PreconditionError);
}

TEST_CASE("property suite rejects an empty run") {
  CHECK_THROWS_AS(run_property_suite(0, 42), InvalidArgument);
}

TEST_CASE("property suite: deterministic, thread-independent, all asserted rows pass") {
  const SuiteReport a = run_property_suite(30, 42);
  const SuiteReport b = run_property_suite(30, 42);
  SuiteOptions par;
  par.threads = 4;
  const SuiteReport c = run_property_suite(30, 42, {}, par);
  CHECK(csv_of(a) == csv_of(b));
  CHECK(csv_of(a) == csv_of(c));
  CHECK_FALSE(a.failed);
  for (const SuiteRow& row : a.rows)
    if (row.asserted) CHECK_MESSAGE(row.pass, row.property << " failed on instance " << row.instance);
  for (const PropertySummary& s : a.summary)
    if (s.property == "prop1_nonstrict") CHECK(s.passed == 30);
  CHECK(csv_of(a).rfind("instance_id,property,margin,pass\n", 0) == 0);
}

TEST_CASE("property suite with a corrupted integrator fails") {
  SuiteOptions opts;
  opts.corrupt_integrator = true;
  const SuiteReport r = run_property_suite(5, 1, {}, opts);
  CHECK(r.failed);
}

TEST_CASE("collect_suite turns exceptions into failing rows") {
  const SuiteReport r = collect_suite(3, 0, 2, [](std::uint64_t i) -> std::vector<SuiteRow> {
    if (i == 1) throw NumericalError("boom");
    return {{i, "ok", 1.0, true, true}};
  });
  REQUIRE(r.rows.size() == 3);
  CHECK(r.failed);
  CHECK(r.rows[1].property.rfind("error", 0) == 0);
  CHECK_FALSE(r.rows[1].pass);
}
