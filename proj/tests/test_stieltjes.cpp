#include <doctest.h>

#include <cmath>
#include <random>

#include "bvpop/errors.hpp"
#include "bvpop/stieltjes.hpp"
#include "oracles.hpp"

using namespace bvpop;

namespace {

// Spans stop at x = 15 so neighbouring samples stay distinguishable; the
// exponential tails continue the functions exactly.

// Samples fn on n + 1 uniform nodes of [a, b].
template <typename F>
GridFn sampled(F fn, double a, double b, int n, std::optional<TailSpec> tail = std::nullopt) {
  std::vector<double> xs(n + 1);
  for (int i = 0; i <= n; ++i) xs[i] = a + (b - a) * i / n;
  xs.back() = b;
  return GridFn::sample(xs, fn, tail);
}

GridFn one_minus_exp() {
  return sampled([](double x) { return 1.0 - std::exp(-x); }, 0.0, 15.0, 15000, TailSpec::exponential(1.0, 1.0));
}

GridFn exp_decay(double rate = 1.0) {
  return sampled([=](double x) { return std::exp(-rate * x); }, 0.0, 15.0 / rate, 15000,
                 TailSpec::exponential(rate, 0.0));
}

GridFn random_pl(std::mt19937_64& eng, double a, double b, int n, double lo, double hi) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> xs{a};
  for (int i = 1; i < n; ++i) xs.push_back(a + (b - a) * (i + 0.8 * (U(eng) - 0.5)) / n);
  xs.push_back(b);
  std::vector<double> vs;
  for (std::size_t i = 0; i < xs.size(); ++i) vs.push_back(lo + (hi - lo) * U(eng));
  return GridFn(xs, vs);
}

const Interval unit{0.0, 1.0};

}  // namespace

TEST_CASE("finite Stieltjes integral examples") {
  const BVFn g(GridFn({0.0, 1.0}, {1.0, 0.0}));
  CHECK(stieltjes_integral(GridFn({0.0, 1.0}, {1.0, 1.0}), g, unit).value == doctest::Approx(1.0).epsilon(1e-15));

  const GridFn x({0.0, 1.0}, {0.0, 1.0});
  CHECK(stieltjes_integral(x, g, unit).value == doctest::Approx(0.5).epsilon(1e-15));

  std::mt19937_64 eng(3);
  for (int k = 0; k < 20; ++k) {
    const GridFn gr = random_pl(eng, -1.0, 2.0, 12, -3.0, 3.0);
    const double c = 0.7 * k - 3.0;
    const double v = stieltjes_integral(GridFn({-1.0, 2.0}, {c, c}), BVFn(gr), Interval(-1.0, 2.0)).value;
    CHECK(v == doctest::Approx(c * (gr.eval(-1.0) - gr.eval(2.0))).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("finite integral rejects infinite intervals and foreign domains") {
  const BVFn g(GridFn({0.0, 1.0}, {1.0, 0.0}, TailSpec::constant(0.0)));
  CHECK_THROWS_AS(stieltjes_integral(GridFn::constant(1.0), g, Interval(0.0, kInf)), InvalidArgument);
  CHECK_THROWS(stieltjes_integral(GridFn({0.5, 1.0}, {1.0, 1.0}), BVFn(GridFn({0.0, 1.0}, {1.0, 0.0})), unit));
}

TEST_CASE("Riemann-Stieltjes partition sums agree with the exact reduction") {
  std::mt19937_64 eng(99);
  for (int k = 0; k < 10; ++k) {
    const GridFn h = random_pl(eng, 0.0, 3.0, 7, 0.0, 2.0);
    const GridFn g = random_pl(eng, 0.0, 3.0, 9, -1.0, 1.0);
    const double exact = stieltjes_integral(h, BVFn(g), Interval(0.0, 3.0)).value;
    const double rs = oracle::rs_sum([&](double t) { return h.eval(t); }, [&](double t) { return g.eval(t); },
                                     0.0, 3.0, 200000);
    CHECK(std::abs(exact - rs) < 1e-8);
  }
}

TEST_CASE("linearity in the integrand and additivity in the integrator") {
  std::mt19937_64 eng(7);
  std::vector<double> xs;
  for (int i = 0; i <= 20; ++i) xs.push_back(0.1 * i);
  auto rnd = [&](double lo, double hi) {
    std::uniform_real_distribution<double> U(lo, hi);
    std::vector<double> v;
    for (std::size_t i = 0; i < xs.size(); ++i) v.push_back(U(eng));
    return GridFn(xs, v);
  };
  const Interval iv(0.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const GridFn h1 = rnd(-1, 1), h2 = rnd(-1, 1), g1 = rnd(-2, 2), g2 = rnd(-2, 2);
    const double a = 1.7, b = -0.3;
    std::vector<double> comb, gsum;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      comb.push_back(a * h1.values()[i] + b * h2.values()[i]);
      gsum.push_back(g1.values()[i] + g2.values()[i]);
    }
    const double lhs = stieltjes_integral(GridFn(xs, comb), BVFn(g1), iv).value;
    const double rhs = a * stieltjes_integral(h1, BVFn(g1), iv).value + b * stieltjes_integral(h2, BVFn(g1), iv).value;
    CHECK(std::abs(lhs - rhs) < 1e-10);
    const double add = stieltjes_integral(h1, BVFn(GridFn(xs, gsum)), iv).value;
    const double sep = stieltjes_integral(h1, BVFn(g1), iv).value + stieltjes_integral(h1, BVFn(g2), iv).value;
    CHECK(std::abs(add - sep) < 1e-10);
  }
}

TEST_CASE("improper integral examples") {
  QuadratureConfig cfg;
  const BVFn g(exp_decay());
  const IntegralResult r1 = improper_stieltjes(GridFn::constant(1.0), g, 0.0, cfg);
  // truncation error below tail_tol, plus summation round-off
  CHECK(std::abs(r1.value - 1.0) <= cfg.tail_tol + 1e-13);
  CHECK(std::abs(r1.value + r1.est_tail_error - 1.0) < 1e-13);
  REQUIRE(r1.truncation_point.has_value());
  CHECK(r1.est_tail_error < cfg.tail_tol);

  // closed form: int (1 - e^-x) e^-x dx = 1/2
  const IntegralResult r2 = improper_stieltjes(one_minus_exp(), g, 0.0, cfg);
  CHECK(std::abs(r2.value - 0.5) < 1e-6);

  CHECK(improper_stieltjes(GridFn::constant(0.0), g, 0.0, cfg).value == 0.0);
}

TEST_CASE("improper integral reports the truncation failure with a best estimate") {
  QuadratureConfig cfg;
  cfg.max_domain = 1e3;
  const BVFn slow(GridFn({0.0, 1.0}, {1.0, 0.9}, TailSpec::exponential(1e-4, 0.0)));
  try {
    (void)improper_stieltjes(GridFn::constant(1.0), slow, 0.0, cfg);
    FAIL("expected a truncation error");
  } catch (const TruncationError& e) {
    CHECK(std::isfinite(e.best_estimate()));
    CHECK(e.best_estimate() > 0.1);
    CHECK(e.error_bound() > cfg.tail_tol);
  }
}

TEST_CASE("integrate dispatches on the interval") {
  const BVFn g(GridFn({0.0, 1.0}, {1.0, 0.0}, TailSpec::constant(0.0)));
  CHECK_FALSE(integrate(GridFn::constant(2.0), g, Interval(0.0, 1.0)).truncation_point.has_value());
  CHECK(integrate(GridFn::constant(2.0), g, Interval(0.0, kInf)).truncation_point.has_value());
}

TEST_CASE("integration by parts residuals") {
  const MonotoneFn h(one_minus_exp(), Direction::increasing);
  const ByPartsCheck c1 = integrate_by_parts_residual(h, BVFn(exp_decay()), Interval(0.0, kInf));
  CHECK(c1.improper);
  CHECK(c1.residual < 1e-8);

  std::mt19937_64 eng(4);
  for (int k = 0; k < 10; ++k) {
    const GridFn g = random_pl(eng, 0.0, 1.0, 10, -1.0, 1.0);
    const ByPartsCheck c = integrate_by_parts_residual(MonotoneFn(GridFn({0.0, 1.0}, {1.0, 1.0}), Direction::non_decreasing),
                                                       BVFn(g), unit);
    CHECK(c.residual < 1e-14);
  }

  const ByPartsCheck c3 = integrate_by_parts_residual(MonotoneFn(GridFn({0.0, 1.0}, {0.0, 1.0}), Direction::increasing),
                                                      BVFn(GridFn({0.0, 1.0}, {1.0, 0.0})), unit);
  CHECK(c3.residual < 1e-12);
  CHECK(c3.lhs == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c3.rhs == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("functional F examples and preconditions") {
  const MonotoneFn H(GridFn({0.0, 1.0}, {0.0, 1.0}), Direction::increasing);
  const FunctionalValue f1 = functional_F(H, BVFn(GridFn({0.0, 1.0}, {1.0, 0.0})));
  CHECK(f1.value == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f1.discrepancy < 1e-14);
  CHECK(functional_F(H, BVFn(GridFn({0.0, 1.0}, {0.5, 0.0}))).value == doctest::Approx(0.25).epsilon(1e-14));

  const MonotoneFn c(GridFn({0.0, 1.0}, {3.0, 3.0}), Direction::non_decreasing);
  const BVFn G(GridFn({0.0, 0.3, 1.0}, {0.8, 1.1, 0.0}));
  CHECK(functional_F(c, G).value == doctest::Approx(3.0 * 0.8).epsilon(1e-14));

  CHECK_THROWS_AS(functional_F(H, BVFn(GridFn({0.0, 1.0}, {1.0, 0.1}))), PreconditionError);
  const MonotoneFn dec(GridFn({0.0, 1.0}, {1.0, 0.0}), Direction::decreasing);
  CHECK_THROWS_AS(functional_F(dec, G), PreconditionError);
}

TEST_CASE("functional F0 examples") {
  const BVFn G(GridFn({0.0, 1.0}, {1.0, 0.0}));
  CHECK(functional_F0(MonotoneFn(GridFn({0.0, 1.0}, {1.0, 1.0}), Direction::non_increasing), G).value ==
        doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(functional_F0(MonotoneFn(GridFn({0.0, 1.0}, {1.0, 0.0}), Direction::decreasing), G).value ==
        doctest::Approx(-0.5).epsilon(1e-14));

  // -int e^-2x dx = -1/2
  const MonotoneFn He(exp_decay(), Direction::decreasing);
  CHECK(std::abs(functional_F0(He, BVFn(exp_decay())).value + 0.5) < 1e-6);
}

TEST_CASE("F0 increases on anchored pairs but not on pairs that differ at the left end") {
  // anchored: G2 - G1 = x(1 - x)/2 vanishes at both ends; H = 2 - x
  const MonotoneFn H(GridFn({0.0, 1.0}, {2.0, 1.0}), Direction::decreasing);
  const GridFn G1 = sampled([](double x) { return 1.0 - x; }, 0.0, 1.0, 400);
  const GridFn G2 = sampled([](double x) { return 1.0 - x + 0.5 * x * (1.0 - x); }, 0.0, 1.0, 400);
  const double d = functional_F0(H, BVFn(G2)).value - functional_F0(H, BVFn(G1)).value;
  const double expected = oracle::simpson([](double x) { return 0.5 * x * (1.0 - x); }, 0.0, 1.0, 1000);
  CHECK(d > 0.0);
  CHECK(std::abs(d - expected) < 1e-5);

  // differing at a: F0(G2) - F0(G1) = -H(a) (G2(a) - G1(a)) + int (G2 - G1) d[-H]
  const MonotoneFn one(GridFn({0.0, 1.0}, {1.0, 1.0}), Direction::non_increasing);
  const double f1 = functional_F0(one, BVFn(GridFn({0.0, 1.0}, {0.5, 0.0}))).value;
  const double f2 = functional_F0(one, BVFn(GridFn({0.0, 1.0}, {1.0, 0.0}))).value;
  CHECK(f1 == doctest::Approx(-0.5));
  CHECK(f2 == doctest::Approx(-1.0));
  CHECK(f2 < f1);
}

TEST_CASE("survival integrator reproduces exp(-c x)") {
  for (double c : {0.5, 1.0, 3.0}) {
    const SurvivalCurve s = survival_integrator(GridFn::constant(c));
    CHECK(s.divergent);
    CHECK(s.g.in_set_A());
    for (double x : {0.0, 0.3, 1.0, 2.5, 7.0}) CHECK(std::abs(s.g(x) - std::exp(-c * x)) < 1e-7);
  }
  const SurvivalCurve fin = survival_integrator(GridFn({0.0, 1.0}, {1.0, 1.0}, TailSpec::exponential(1.0, 0.0)));
  CHECK_FALSE(fin.divergent);
  CHECK_THROWS_AS(survival_integrator(GridFn({0.0, 1.0}, {1.0, -1.0}, TailSpec::constant(-1.0))), PreconditionError);
}

TEST_CASE("functional I examples") {
  const MonotoneFn h(one_minus_exp(), Direction::increasing);
  for (double c : {1.0, 2.0}) {
    const IResult r = functional_I(h, GridFn::constant(c));
    CHECK(std::abs(r.value - 1.0 / (c + 1.0)) < 1e-6);
    CHECK_FALSE(r.hypothesis_warning);
  }
  const MonotoneFn k(GridFn::constant(2.5), Direction::non_decreasing);
  CHECK(std::abs(functional_I(k, GridFn::constant(1.0)).value - 2.5) < 1e-9);

  // f with finite mass: value still returned, hypothesis flagged
  const IResult w = functional_I(h, GridFn({0.0, 1.0}, {1.0, 1.0}, TailSpec::exponential(1.0, 0.0)));
  CHECK(w.hypothesis_warning);
  CHECK(std::isfinite(w.value));
}

TEST_CASE("quadrature config validation") {
  QuadratureConfig c;
  CHECK_NOTHROW(c.validate());
  c.panel_points = 1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.tail_tol = -1e-3;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}
