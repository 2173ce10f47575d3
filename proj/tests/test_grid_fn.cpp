#include <doctest.h>

#include <cmath>
#include <random>

#include "bvpop/errors.hpp"
#include "bvpop/grid_fn.hpp"
#include "oracles.hpp"

using namespace bvpop;

namespace {

GridFn random_fn(std::mt19937_64& eng, bool with_tail) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> xs{0.0}, vs{U(eng) * 4 - 2};
  const int n = 3 + static_cast<int>(eng() % 20);
  for (int i = 0; i < n; ++i) {
    xs.push_back(xs.back() + 0.05 + U(eng));
    vs.push_back(U(eng) * 4 - 2);
  }
  if (!with_tail) return GridFn(xs, vs);
  return GridFn(xs, vs, TailSpec::exponential(0.2 + 2 * U(eng), U(eng) - 0.5));
}

}  // namespace

TEST_CASE("interval needs a < b and a finite left end") {
  CHECK_NOTHROW(Interval(0.0, kInf));
  CHECK_THROWS_AS(Interval(1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Interval(-kInf, 1.0), InvalidArgument);
  CHECK(Interval(0.0, kInf).infinite());
}

TEST_CASE("construction rejects malformed grids and tails") {
  CHECK_THROWS_AS(GridFn({0.0}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(GridFn({0.0, 1.0}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(GridFn({0.0, 0.0}, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(GridFn({0.0, 1.0}, {1.0, NAN}), InvalidArgument);
  CHECK_THROWS_AS(GridFn({0.0, 1.0}, {1.0, 1.0}, TailSpec::exponential(0.0)), InvalidArgument);
  CHECK_THROWS_AS(GridFn({0.0, 1.0}, {1.0, 2.0}, TailSpec::constant(1.0)), InvalidArgument);
}

TEST_CASE("eval: interpolation, node values and exponential tail") {
  const GridFn lin({0.0, 1.0}, {0.0, 1.0});
  CHECK(lin.eval(0.5) == doctest::Approx(0.5).epsilon(1e-15));

  const GridFn f({0.0, 1.0}, {3.0, 3.0}, TailSpec::exponential(1.0, 0.0));
  CHECK(f.eval(1.0) == 3.0);
  CHECK(f.eval(1.0 + std::log(2.0)) == doctest::Approx(1.5).epsilon(1e-14));

  const GridFn g({0.0, 1.0}, {1.0, 2.0}, TailSpec::exponential(2.0, 5.0));
  CHECK(g.eval(1.5) == doctest::Approx(5.0 - 3.0 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(g.right_value() == 5.0);
}

TEST_CASE("eval outside the domain is an error") {
  const GridFn fin({0.0, 1.0}, {0.0, 1.0});
  CHECK_THROWS_AS(fin.eval(-0.1), DomainError);
  CHECK_THROWS_AS(fin.eval(1.1), DomainError);
  CHECK_THROWS_AS(fin.eval(NAN), DomainError);
  const GridFn inf({0.0, 1.0}, {0.0, 1.0}, TailSpec::constant(1.0));
  CHECK(inf.eval(1e9) == 1.0);
}

TEST_CASE("eval reproduces stored values bit-exactly") {
  std::mt19937_64 eng(5);
  for (int k = 0; k < 50; ++k) {
    const GridFn f = random_fn(eng, k % 2 == 0);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f.eval(f.grid()[i]) == f.values()[i]);
  }
}

TEST_CASE("total variation examples") {
  CHECK(GridFn({0.0, 1.0, 2.0}, {1.0, 0.5, 0.0}).total_variation() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(GridFn({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}).total_variation() == doctest::Approx(2.0).epsilon(1e-15));

  const GridFn f({0.0, 1.0}, {2.0, 1.0}, TailSpec::exponential(3.0, 0.0));
  const double dense = oracle::variation([&](double x) { return f.eval(x); }, 0.0, 40.0, 400000);
  CHECK(dense == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.total_variation() == doctest::Approx(dense).epsilon(1e-12));
}

TEST_CASE("total variation bounds and monotone equality on random functions") {
  std::mt19937_64 eng(11);
  for (int k = 0; k < 100; ++k) {
    const GridFn f = random_fn(eng, k % 2 == 1);
    CHECK(f.total_variation() >= std::abs(f.right_value() - f.eval(f.a())) - 1e-15);
  }
  for (int k = 0; k < 50; ++k) {
    std::vector<double> xs{0.0}, vs{5.0};
    for (int i = 0; i < 10; ++i) {
      xs.push_back(xs.back() + 0.3 + 0.1 * (eng() % 7));
      vs.push_back(vs.back() - 0.01 * static_cast<double>(1 + eng() % 50));
    }
    const GridFn f(xs, vs, TailSpec::exponential(1.0, vs.back() - 0.5));
    CHECK(std::abs(f.total_variation() - (f.eval(0.0) - f.right_value())) < 1e-12);
  }
}

TEST_CASE("refinement leaves eval and total variation unchanged") {
  std::mt19937_64 eng(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const GridFn f = random_fn(eng, k % 2 == 0);
    std::vector<double> extra;
    for (int i = 0; i < 15; ++i) extra.push_back(f.a() + U(eng) * (f.last_node() - f.a()));
    const GridFn r = f.refined(extra);
    CHECK(std::abs(r.total_variation() - f.total_variation()) < 1e-12);
    for (int i = 0; i < 40; ++i) {
      const double x = f.a() + U(eng) * (f.last_node() + 3.0 - f.a());
      if (!f.infinite() && x > f.last_node()) continue;
      CHECK(std::abs(r.eval(x) - f.eval(x)) < 1e-12);
    }
  }
}

TEST_CASE("integral is exact for the representation") {
  const GridFn f({0.0, 1.0, 3.0}, {0.0, 2.0, 1.0}, TailSpec::exponential(0.5, 0.0));
  // trapezoids 1 + 3, tail 1 / 0.5
  CHECK(f.integral(0.0, kInf) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(f.integral(0.5, 2.0) ==
        doctest::Approx(oracle::simpson([&](double x) { return f.eval(x); }, 0.5, 1.0, 2) +
                        oracle::simpson([&](double x) { return f.eval(x); }, 1.0, 2.0, 2))
            .epsilon(1e-14));
}

TEST_CASE("classify_monotone") {
  CHECK(classify_monotone(GridFn({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0})).direction == Direction::increasing);
  const MonotoneClass c = classify_monotone(GridFn({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}));
  CHECK(c.direction == Direction::non_decreasing);
  CHECK(c.constant);
  CHECK(satisfies(c, Direction::non_increasing));
  CHECK_FALSE(classify_monotone(GridFn({0.0, 1.0, 2.0}, {0.0, 1.0, 0.5})).direction.has_value());
  // tie rule: a step of 1e-13 is a tie, not a strict increase
  CHECK(classify_monotone(GridFn({0.0, 1.0, 2.0}, {0.0, 1.0, 1.0 + 1e-13})).direction ==
        Direction::non_decreasing);
  // the exponential tail step counts
  CHECK(classify_monotone(GridFn({0.0, 1.0}, {0.0, 1.0}, TailSpec::exponential(1.0, 0.5))).direction ==
        std::nullopt);
}

TEST_CASE("MonotoneFn and BVFn validate their hypotheses") {
  CHECK_THROWS_AS(MonotoneFn(GridFn({0.0, 1.0}, {1.0, 0.0}), Direction::increasing), InvalidArgument);
  CHECK_THROWS_AS(MonotoneFn(GridFn({0.0, 1.0}, {-1.0, 0.0}), Direction::increasing), InvalidArgument);
  const MonotoneFn h(GridFn({0.0, 1.0}, {0.5, 2.0}, TailSpec::constant(2.0)), Direction::increasing);
  CHECK(h.bound() == 2.0);
  CHECK(h.strict());

  const BVFn g(GridFn({0.0, 1.0}, {1.0, 0.5}, TailSpec::exponential(1.0, 0.0)));
  CHECK(g.in_set_A());
  CHECK(g.right_value() == 0.0);
  CHECK_FALSE(BVFn(GridFn({0.0, 1.0}, {1.0, 1e-6})).in_set_A());
  CHECK(BVFn(GridFn({0.0, 1.0}, {1.0, 1e-10})).in_set_A());
}

TEST_CASE("direction names round-trip") {
  for (Direction d : {Direction::increasing, Direction::non_decreasing, Direction::decreasing,
                      Direction::non_increasing})
    CHECK(parse_direction(to_string(d)) == d);
  CHECK_FALSE(parse_direction("upward").has_value());
}
