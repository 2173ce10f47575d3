#include "bvpop/monotone_props.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <ostream>
#include <thread>

#include "bvpop/errors.hpp"
#include "bvpop/format.hpp"

namespace bvpop {

Rng Rng::for_instance(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return Rng(z);
}

std::string_view to_string(FamilyKind k) noexcept {
  switch (k) {
    case FamilyKind::exp_decay: return "exp_decay";
    case FamilyKind::rational_decay: return "rational_decay";
    case FamilyKind::piecewise_random: return "piecewise_random";
  }
  return "unknown";
}

namespace {

std::vector<double> uniform_nodes(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  xs.back() = hi;
  return xs;
}

// Strictly increasing random nodes a = x_0 < ... < x_{n+1} = b.
std::vector<double> random_nodes(Rng& rng, double lo, double hi, int interior) {
  std::vector<double> xs{lo, hi};
  for (int i = 0; i < interior; ++i) xs.push_back(rng.uniform(lo, hi));
  std::sort(xs.begin(), xs.end());
  const double min_gap = 1e-6 * (hi - lo);
  std::vector<double> out{xs.front()};
  for (std::size_t i = 1; i + 1 < xs.size(); ++i)
    if (xs[i] - out.back() >= min_gap && hi - xs[i] >= min_gap) out.push_back(xs[i]);
  out.push_back(hi);
  return out;
}

}  // namespace

BVFn gen_integrator(FamilyKind kind, Rng& rng) {
  switch (kind) {
    case FamilyKind::exp_decay: {
      const double amp = rng.uniform(0.5, 2.0);
      const double lam = rng.uniform(0.3, 3.0);
      const auto xs = uniform_nodes(0.0, 12.0 / lam, 600);
      return BVFn(GridFn::sample(xs, [&](double x) { return amp * std::exp(-lam * x); },
                                 TailSpec::exponential(lam)));
    }
    case FamilyKind::rational_decay: {
      const double amp = rng.uniform(0.5, 2.0);
      const double q = rng.uniform(1.5, 4.0);
      const double x_end = std::pow(1e4, 1.0 / q) - 1.0;
      std::vector<double> xs = uniform_nodes(0.0, std::log1p(x_end), 600);
      for (double& x : xs) x = std::expm1(x);
      xs.front() = 0.0;
      xs.back() = x_end;
      return BVFn(GridFn::sample(xs, [&](double x) { return amp * std::pow(1.0 + x, -q); },
                                 TailSpec::exponential(q / (1.0 + x_end))));
    }
    case FamilyKind::piecewise_random: {
      const double b = rng.uniform(1.0, 5.0);
      const auto xs = random_nodes(rng, 0.0, b, rng.integer(5, 40));
      std::vector<double> vals(xs.size(), 0.0);
      for (std::size_t i = xs.size() - 1; i-- > 0;)
        vals[i] = vals[i + 1] + rng.uniform(0.05, 1.0) * (xs[i + 1] - xs[i]);
      return BVFn(GridFn(xs, std::move(vals)));
    }
  }
  throw InvalidArgument("unknown instance family");
}

std::pair<BVFn, BVFn> gen_pair_A(const InstanceFamily& family) {
  Rng rng(family.seed);
  BVFn g1 = gen_integrator(family.kind, rng);
  const GridFn& b1 = g1.base();
  const double eps = rng.uniform(0.05, 0.5);
  const double a = b1.a();
  const auto xs = b1.grid();
  const auto v1 = b1.values();
  std::vector<double> v2(v1.begin(), v1.end());

  if (!b1.infinite()) {
    const double b = b1.last_node();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double w = (b - xs[i]) / (b - a);
      if (family.anchored) w *= 4.0 * (xs[i] - a) / (b - a);
      v2[i] += eps * w * (1.0 + 0.5 * rng.uniform());
    }
    v2.back() = 0.0;
    return {std::move(g1), BVFn(GridFn(std::vector<double>(xs.begin(), xs.end()), std::move(v2)))};
  }

  // Multiplicative bump keeps G2 in the same exponential tail family.
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = family.anchored ? (xs[i] - a) / (xs[i] - a + 1.0) : 1.0 + 0.5 * rng.uniform();
    v2[i] *= 1.0 + eps * w;
  }
  GridFn b2(std::vector<double>(xs.begin(), xs.end()), std::move(v2), b1.tail());
  return {std::move(g1), BVFn(std::move(b2))};
}

MonotoneFn gen_increasing(IntegrandKind kind, Rng& rng, const GridFn& like) {
  const double a = like.a();
  const bool inf = like.infinite();
  const double d = rng.uniform(0.0, 0.5);
  const double amp = rng.uniform(0.5, 2.0);
  switch (kind) {
    case IntegrandKind::saturating: {
      const double kap = rng.uniform(0.2, 3.0);
      auto fn = [&](double x) { return d + amp * -std::expm1(-kap * (x - a)); };
      if (inf)
        return MonotoneFn(GridFn::sample(uniform_nodes(a, a + 14.0 / kap, 400), fn,
                                         TailSpec::exponential(kap, d + amp)),
                          Direction::increasing);
      return MonotoneFn(GridFn::sample(uniform_nodes(a, like.last_node(), 400), fn),
                        Direction::increasing);
    }
    case IntegrandKind::rational_ramp: {
      const double s = rng.uniform(0.2, 3.0);
      auto fn = [&](double x) { return d + amp * (x - a) / (x - a + s); };
      if (inf) {
        std::vector<double> xs = uniform_nodes(0.0, std::log(201.0), 400);
        for (double& x : xs) x = a + s * std::expm1(x);
        xs.front() = a;
        const double x_end = xs.back();
        return MonotoneFn(
            GridFn::sample(xs, fn, TailSpec::exponential(1.0 / (x_end - a + s), d + amp)),
            Direction::increasing);
      }
      return MonotoneFn(GridFn::sample(uniform_nodes(a, like.last_node(), 400), fn),
                        Direction::increasing);
    }
    case IntegrandKind::staircase: {
      const int steps = rng.integer(4, 20);
      const double hi = inf ? a + rng.uniform(2.0, 10.0) : like.last_node();
      const auto corners = random_nodes(rng, a, hi, 2 * steps);
      std::vector<double> vals(corners.size());
      vals[0] = d;
      for (std::size_t i = 1; i < corners.size(); ++i) {
        const double rise = rng.uniform(0.05, 0.5);
        // alternate ramps and nearly flat treads
        vals[i] = vals[i - 1] + (i % 2 == 1 ? rise : 0.01 * rise);
      }
      if (inf) {
        const double top = vals.back() + rng.uniform(0.05, 0.5);
        return MonotoneFn(GridFn(corners, std::move(vals),
                                 TailSpec::exponential(rng.uniform(0.5, 2.0), top)),
                          Direction::increasing);
      }
      return MonotoneFn(GridFn(corners, std::move(vals)), Direction::increasing);
    }
  }
  throw InvalidArgument("unknown integrand kind");
}

MonotoneFn gen_decreasing(Rng& rng, const GridFn& like) {
  const double a = like.a();
  const double d = rng.uniform(0.1, 0.5);
  const double amp = rng.uniform(0.5, 2.0);
  const double kap = rng.uniform(0.2, 3.0);
  auto fn = [&](double x) { return d + amp * std::exp(-kap * (x - a)); };
  if (like.infinite())
    return MonotoneFn(GridFn::sample(uniform_nodes(a, a + 14.0 / kap, 400), fn,
                                     TailSpec::exponential(kap, d)),
                      Direction::decreasing);
  return MonotoneFn(GridFn::sample(uniform_nodes(a, like.last_node(), 400), fn),
                    Direction::decreasing);
}

MonotoneFn constant_on(double c, const GridFn& like) {
  if (like.infinite()) return MonotoneFn(GridFn::constant(c, like.a()), Direction::non_decreasing);
  return MonotoneFn(GridFn({like.a(), like.last_node()}, {c, c}), Direction::non_decreasing);
}

void require_ordered(const GridFn& lower, const GridFn& upper, std::string_view what) {
  if (lower.a() != upper.a() || lower.right_end() != upper.right_end())
    throw PreconditionError(std::string(what) + ": functions live on different intervals");
  const double end = std::max(lower.last_node(), upper.last_node());
  std::vector<double> pts = merge_grids(lower.grid(), upper.grid(), lower.a(), end);
  if (lower.infinite()) {
    double scale = 1.0;
    for (const GridFn* f : {&lower, &upper})
      if (f->tail()->is_exponential()) scale = std::max(scale, 1.0 / f->tail()->rate);
    for (double k : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) pts.push_back(end + k * scale);
  }
  for (double x : pts) {
    const double lo = lower.eval(x), hi = upper.eval(x);
    if (lo > hi)
      throw PreconditionError(std::string(what) + ": ordering violated at x = " + format_real(x) +
                              " (" + format_real(lo) + " > " + format_real(hi) + ")");
  }
}

Prop1Check check_prop1(const MonotoneFn& H, const BVFn& G1, const BVFn& G2,
                       const QuadratureConfig& cfg) {
  require_ordered(G1.base(), G2.base(), "check_prop1 needs G1 <= G2");
  Prop1Check c;
  c.F1 = functional_F(H, G1, cfg).value;
  c.F2 = functional_F(H, G2, cfg).value;
  c.delta = c.F2 - c.F1;
  c.strict_ok = c.delta > 0.0;
  c.nonstrict_ok = c.delta >= -1e-10;
  return c;
}

Prop1Check check_cor1(const MonotoneFn& H, const BVFn& G1, const BVFn& G2,
                      const QuadratureConfig& cfg) {
  require_ordered(G1.base(), G2.base(), "check_cor1 needs G1 <= G2");
  Prop1Check c;
  c.F1 = functional_F0(H, G1, cfg).value;
  c.F2 = functional_F0(H, G2, cfg).value;
  c.delta = c.F2 - c.F1;
  c.strict_ok = c.delta > 0.0;
  c.nonstrict_ok = c.delta >= -1e-10;
  return c;
}

GridFn power_transform(const GridFn& f, double p, int panel_points) {
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument("exponent p must be > 0");
  for (double v : f.values())
    if (v < 0.0) throw PreconditionError("power transform needs non-negative values");
  if (p == 1.0) return f;

  std::vector<double> extra;
  const auto xs = f.grid();
  const int pieces = std::max(1, panel_points - 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    for (int j = 1; j < pieces; ++j) extra.push_back(xs[i] + (xs[i + 1] - xs[i]) * j / pieces);
  const GridFn fine = f.refined(extra);

  std::vector<double> vals;
  vals.reserve(fine.size());
  for (double v : fine.values()) vals.push_back(std::pow(v, p));

  std::optional<TailSpec> tail;
  if (f.tail()) {
    const TailSpec& t = *f.tail();
    if (!t.is_exponential())
      tail = TailSpec::constant(vals.back());
    else if (t.limit == 0.0)
      tail = TailSpec::exponential(p * t.rate, 0.0);
    else
      tail = TailSpec::exponential(t.rate, std::pow(t.limit, p));
  }
  const auto fg = fine.grid();
  return GridFn(std::vector<double>(fg.begin(), fg.end()), std::move(vals), tail);
}

HMReport hm_evaluate(const MonotoneFn& h, const BVFn& g, double p, const QuadratureConfig& cfg) {
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument("exponent p must be > 0");
  if (!h.non_decreasing()) throw PreconditionError("h must be increasing");
  for (double v : g.base().values())
    if (v < 0.0) throw PreconditionError("g must be non-negative");
  const MonotoneClass gc = classify_monotone(g.base());
  if (!satisfies(gc, Direction::non_increasing)) throw PreconditionError("g must be decreasing");
  if (!g.in_set_A()) throw PreconditionError("g must vanish at the right endpoint");

  const Interval iv = g.base().interval();
  HMReport r;
  r.p = p;
  r.lhs = integrate(h.base(), g, iv, cfg).value;
  const GridFn hp = power_transform(h.base(), p, cfg.panel_points);
  const BVFn gp(power_transform(g.base(), p, cfg.panel_points));
  r.m = integrate(hp, gp, iv, cfg).value;
  r.rhs_inv_p = std::pow(r.m, 1.0 / p);
  r.rhs_pow_p = std::pow(r.m, p);
  auto margin = [&](double rhs) {
    if (p == 1.0) return -std::abs(r.lhs - rhs);
    return p < 1.0 ? rhs - r.lhs : r.lhs - rhs;
  };
  r.margin_inv_p = margin(r.rhs_inv_p);
  r.margin_pow_p = margin(r.rhs_pow_p);
  r.holds_inv_p = r.margin_inv_p >= -kHMSlack;
  r.holds_pow_p = r.margin_pow_p >= -kHMSlack;
  return r;
}

namespace {

std::string exponent_tag(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

std::vector<SuiteRow> run_instance(std::uint64_t seed, std::uint64_t index,
                                   const QuadratureConfig& cfg, const SuiteOptions& opts) {
  std::vector<SuiteRow> rows;
  auto add = [&](std::string property, double margin, bool pass, bool asserted = true) {
    rows.push_back({index, std::move(property), margin, pass, asserted});
  };

  Rng rng = Rng::for_instance(seed, index);
  const auto kind = static_cast<FamilyKind>(index % 3);
  const InstanceFamily fam{kind, static_cast<std::uint64_t>(rng.uniform() * 0x1.0p53), rng.coin()};
  const auto [g1, g2] = gen_pair_A(fam);
  const MonotoneFn H =
      gen_increasing(static_cast<IntegrandKind>(rng.integer(0, 2)), rng, g1.base());
  const Interval iv = g1.base().interval();

  const ByPartsCheck ibp = integrate_by_parts_residual(H, g1, iv, cfg);
  const double ibp_tol = ibp.improper ? 10.0 * cfg.tail_tol : 1e-7;
  add("by_parts", ibp_tol - ibp.residual, ibp.residual < ibp_tol);

  Prop1Check p1 = check_prop1(H, g1, g2, cfg);
  if (opts.corrupt_integrator) p1.delta = -p1.delta;
  add("prop1_nonstrict", p1.delta + 1e-10, p1.delta >= -1e-10);
  add("prop1_strict", p1.delta, p1.delta > 0.0);

  const double c = rng.uniform(0.5, 2.0);
  const Prop1Check pc = check_prop1(constant_on(c, g1.base()), g1, g2, cfg);
  const double expected = c * (g2.base().eval(iv.a) - g1.base().eval(iv.a));
  const double dev = std::abs(pc.delta - expected);
  add("prop1_constant_H", 1e-9 - dev, dev < 1e-9);

  // F0 is increasing in G only for perturbations that leave G(a) fixed.
  const InstanceFamily anchored{kind, static_cast<std::uint64_t>(rng.uniform() * 0x1.0p53), true};
  const auto [a1, a2] = gen_pair_A(anchored);
  const MonotoneFn Hd = gen_decreasing(rng, a1.base());
  const Prop1Check c1 = check_cor1(Hd, a1, a2, cfg);
  add("cor1_strict", c1.delta, c1.delta > 0.0);

  {
    // Example 1: I(f) decreasing in f for increasing h.
    const double span = rng.uniform(2.0, 6.0);
    const auto fx = random_nodes(rng, 0.0, span, rng.integer(3, 12));
    std::vector<double> f1v, f2v;
    for (std::size_t i = 0; i < fx.size(); ++i) {
      f1v.push_back(rng.uniform(0.1, 2.0));
      f2v.push_back(f1v.back() + rng.uniform(0.05, 0.5));
    }
    const GridFn f1(fx, f1v, TailSpec::constant(f1v.back()));
    const GridFn f2(fx, f2v, TailSpec::constant(f2v.back()));
    const MonotoneFn h = gen_increasing(IntegrandKind::saturating, rng, f1);
    const double d_i = functional_I(h, f1, cfg).value - functional_I(h, f2, cfg).value;
    add("example1_strict", d_i, d_i > 0.0);
  }

  for (double p : opts.hm_exponents) {
    const HMReport hm = hm_evaluate(H, g1, p, cfg);
    const std::string tag = exponent_tag(p);
    add("hm_inv_p:" + tag, hm.margin_inv_p, hm.holds_inv_p);
    add("hm_pow_p:" + tag, hm.margin_pow_p, hm.holds_pow_p, false);
    if (p == 1.0) {
      const double gap = std::max(std::abs(hm.lhs - hm.rhs_inv_p), std::abs(hm.lhs - hm.rhs_pow_p));
      add("hm_equality_p1", 1e-9 - gap, gap < 1e-9);
    }
  }
  return rows;
}

}  // namespace

SuiteReport collect_suite(std::size_t n_instances, std::uint64_t seed, unsigned threads,
                          const std::function<std::vector<SuiteRow>(std::uint64_t)>& run) {
  if (n_instances < 1) throw InvalidArgument("n_instances must be >= 1");
  std::vector<std::vector<SuiteRow>> per_instance(n_instances);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_instances; i = next++) {
      try {
        per_instance[i] = run(i);
      } catch (const std::exception& e) {
        per_instance[i] = {{i, std::string("error: ") + e.what(), 0.0, false, true}};
      }
    }
  };
  threads = std::max(1u, static_cast<unsigned>(std::min<std::size_t>(threads, n_instances)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  SuiteReport report;
  report.seed = seed;
  report.n_instances = n_instances;
  for (auto& rows : per_instance)
    for (auto& row : rows) report.rows.push_back(std::move(row));

  for (const SuiteRow& row : report.rows) {
    auto it = std::find_if(report.summary.begin(), report.summary.end(),
                           [&](const PropertySummary& s) { return s.property == row.property; });
    if (it == report.summary.end()) {
      report.summary.push_back({row.property, 0, 0, row.margin, row.asserted});
      it = std::prev(report.summary.end());
    }
    ++it->count;
    if (row.pass) ++it->passed;
    it->worst_margin = std::min(it->worst_margin, row.margin);
    if (row.asserted && !row.pass) report.failed = true;
  }
  return report;
}

SuiteReport run_property_suite(std::size_t n_instances, std::uint64_t seed,
                               const QuadratureConfig& cfg, const SuiteOptions& opts) {
  cfg.validate();
  return collect_suite(n_instances, seed, opts.threads, [&](std::uint64_t i) {
    return run_instance(seed, i, cfg, opts);
  });
}

void write_suite_csv(const SuiteReport& report, std::ostream& out) {
  out << "instance_id,property,margin,pass\n";
  for (const SuiteRow& row : report.rows) {
    std::string prop = row.property;
    std::replace(prop.begin(), prop.end(), ',', ';');
    out << row.instance << ',' << prop << ',' << format_real(row.margin) << ','
        << (row.pass ? "true" : "false") << '\n';
  }
}

}  // namespace bvpop
