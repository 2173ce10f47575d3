#include "bvpop/stieltjes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bvpop/errors.hpp"

namespace bvpop {
namespace {

// int_0^L exp(-lam t) dt
double exp_mass(double lam, double len) {
  if (lam * len < 1e-300) return len;
  return -std::expm1(-lam * len) / lam;
}

// int_0^L t exp(-lam t) dt
double exp_moment(double lam, double len) {
  const double y = lam * len;
  if (y < 1e-3) return len * len * (0.5 - y / 3.0 + y * y / 8.0 - y * y * y / 30.0);
  return (exp_mass(lam, len) - len * std::exp(-y)) / lam;
}

// Local form of a grid function on a segment [x0, x1] that does not straddle
// the last node: linear between endpoint values, or alpha + beta*exp(-kappa t).
struct LocalForm {
  bool in_tail = false;
  double f0 = 0.0, f1 = 0.0;               // linear part
  double alpha = 0.0, beta = 0.0, kappa = 0.0;  // tail part, t = x - x0
};

LocalForm local_form(const GridFn& f, double x0, double x1) {
  LocalForm lf;
  if (x1 <= f.last_node()) {
    lf.f0 = f.eval(x0);
    lf.f1 = f.eval(x1);
    return lf;
  }
  lf.in_tail = true;
  const TailSpec& tail = *f.tail();
  lf.alpha = tail.limit;
  if (tail.is_exponential()) {
    lf.kappa = tail.rate;
    lf.beta = (f.last_value() - tail.limit) * std::exp(-tail.rate * (x0 - f.last_node()));
  }
  return lf;
}

void check_cfg_and_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite result in ") + what);
}

double by_parts_integral_g_dh(const GridFn& g, const GridFn& h, double a, double b,
                              const QuadratureConfig& cfg) {
  if (b == kInf) return -improper_stieltjes(g, BVFn(h), a, cfg).value;
  return integrate_against(g, h, a, b);
}

}  // namespace

void QuadratureConfig::validate() const {
  if (panel_points < 2) throw InvalidArgument("cfg.panel_points must be >= 2");
  if (!(tail_tol > 0.0) || !std::isfinite(tail_tol))
    throw InvalidArgument("cfg.tail_tol must be > 0");
  if (!(max_domain > 0.0)) throw InvalidArgument("cfg.max_domain must be > 0");
  if (!(max_hazard_step > 0.0) || !std::isfinite(max_hazard_step))
    throw InvalidArgument("cfg.max_hazard_step must be > 0");
}

double integrate_against(const GridFn& f, const GridFn& k, double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
    throw InvalidArgument("integrate_against needs finite bounds lo <= hi");
  if (lo < f.a() || lo < k.a() || hi > f.right_end() || hi > k.right_end())
    throw DomainError("integration range is not inside the domains of both functions");
  if (lo == hi) return 0.0;

  const std::vector<double> nodes = merge_grids(f.grid(), k.grid(), lo, hi);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double x0 = nodes[i], x1 = nodes[i + 1];
    const double len = x1 - x0;
    const LocalForm fl = local_form(f, x0, x1);

    if (x1 <= k.last_node()) {
      const double dk = k.eval(x1) - k.eval(x0);
      if (dk == 0.0) continue;
      if (!fl.in_tail)
        sum += dk * 0.5 * (fl.f0 + fl.f1);
      else
        sum += dk * fl.alpha + (fl.kappa > 0.0 ? dk / len * fl.beta * exp_mass(fl.kappa, len) : 0.0);
      continue;
    }

    const TailSpec& kt = *k.tail();
    if (!kt.is_exponential()) continue;  // constant integrator carries no mass
    const double lam = kt.rate;
    const double dens =
        -lam * (k.last_value() - kt.limit) * std::exp(-lam * (x0 - k.last_node()));
    if (dens == 0.0) continue;
    if (!fl.in_tail)
      sum += dens * (fl.f0 * exp_mass(lam, len) + (fl.f1 - fl.f0) / len * exp_moment(lam, len));
    else
      sum += dens * (fl.alpha * exp_mass(lam, len) + fl.beta * exp_mass(fl.kappa + lam, len));
  }
  check_cfg_and_finite(sum, "Stieltjes sum");
  return sum;
}

IntegralResult stieltjes_integral(const GridFn& h, const BVFn& g, Interval iv,
                                  const QuadratureConfig& cfg) {
  cfg.validate();
  if (iv.infinite())
    throw InvalidArgument("stieltjes_integral needs a finite interval; use improper_stieltjes");
  IntegralResult r;
  r.value = -integrate_against(h, g.base(), iv.a, iv.b);
  return r;
}

IntegralResult improper_stieltjes(const GridFn& h, const BVFn& g, double a,
                                  const QuadratureConfig& cfg) {
  cfg.validate();
  const GridFn& gb = g.base();
  if (!gb.infinite()) throw InvalidArgument("improper integral needs an integrator with a declared limit");
  if (!h.infinite()) throw DomainError("integrand must be defined on [a, inf)");
  if (a < h.a() || a < gb.a()) throw DomainError("lower limit lies outside the domains");

  IntegralResult r;
  const double bound = h.sup_abs_from(a);
  if (bound == 0.0) {
    r.truncation_point = a;
    return r;
  }

  auto meets = [&](double x) { return bound * gb.variation_from(x) < cfg.tail_tol; };
  std::optional<double> cut;
  if (meets(a)) {
    cut = a;
  } else {
    const auto grid = gb.grid();
    auto first = std::upper_bound(grid.begin(), grid.end(), a);
    auto it = std::partition_point(first, grid.end(), [&](double x) { return !meets(x); });
    if (it != grid.end()) cut = *it;
  }
  if (!cut) {
    // Criterion falls inside the exponential tail of g: solve it in closed form.
    const TailSpec& tail = *gb.tail();
    const double amp = std::abs(gb.last_value() - tail.limit);
    const double x_last = gb.last_node();
    double x = x_last + std::log(bound * amp / cfg.tail_tol) / tail.rate;
    for (int k = 0; k < 64 && !meets(x); ++k) x += 1e-12 * std::max(1.0, std::abs(x)) * (k + 1);
    cut = std::max(x, a);
  }
  if (*cut > cfg.max_domain) {
    const double best = -integrate_against(h, gb, a, std::max(a, cfg.max_domain));
    throw TruncationError("tail criterion not met before max_domain = " +
                              std::to_string(cfg.max_domain),
                          best, bound * gb.variation_from(std::max(a, cfg.max_domain)));
  }
  r.truncation_point = *cut;
  r.value = -integrate_against(h, gb, a, *cut);
  r.est_tail_error = bound * gb.variation_from(*cut);
  return r;
}

IntegralResult integrate(const GridFn& h, const BVFn& g, Interval iv, const QuadratureConfig& cfg) {
  if (iv.infinite()) return improper_stieltjes(h, g, iv.a, cfg);
  return stieltjes_integral(h, g, iv, cfg);
}

ByPartsCheck integrate_by_parts_residual(const MonotoneFn& h, const BVFn& g, Interval iv,
                                         const QuadratureConfig& cfg) {
  const GridFn& hb = h.base();
  const GridFn& gb = g.base();
  ByPartsCheck c;
  c.improper = iv.infinite();
  c.lhs = integrate(hb, g, iv, cfg).value;
  const double h_end = c.improper ? hb.right_value() : hb.eval(iv.b);
  const double g_end = c.improper ? g.right_value() : gb.eval(iv.b);
  c.rhs = hb.eval(iv.a) * gb.eval(iv.a) - h_end * g_end +
          by_parts_integral_g_dh(gb, hb, iv.a, iv.b, cfg);
  c.residual = std::abs(c.lhs - c.rhs);
  return c;
}

namespace {

void require_set_A(const BVFn& G) {
  if (!G.in_set_A())
    throw PreconditionError("G is not in A: |G(b)| = " + std::to_string(std::abs(G.right_value())) +
                            " exceeds " + std::to_string(kSetATol));
}

// H(a)G(a) - H(b)G(b) + int G dH, the by-parts form of int H d[-G].
double by_parts_form(const MonotoneFn& H, const BVFn& G, const QuadratureConfig& cfg) {
  const GridFn& hb = H.base();
  const GridFn& gb = G.base();
  const Interval iv = gb.interval();
  const double h_end = iv.infinite() ? hb.right_value() : hb.eval(iv.b);
  return hb.eval(iv.a) * gb.eval(iv.a) - h_end * G.right_value() +
         by_parts_integral_g_dh(gb, hb, iv.a, iv.b, cfg);
}

}  // namespace

FunctionalValue functional_F(const MonotoneFn& H, const BVFn& G, const QuadratureConfig& cfg) {
  if (!H.non_decreasing())
    throw PreconditionError("functional F needs a non-decreasing H, got " +
                            std::string(to_string(H.direction())));
  require_set_A(G);
  FunctionalValue v;
  v.value = integrate(H.base(), G, G.base().interval(), cfg).value;
  v.by_parts = by_parts_form(H, G, cfg);
  v.discrepancy = std::abs(v.value - v.by_parts);
  return v;
}

FunctionalValue functional_F0(const MonotoneFn& H, const BVFn& G, const QuadratureConfig& cfg) {
  if (H.non_decreasing() && !(H.direction() == Direction::non_decreasing &&
                              classify_monotone(H.base()).constant))
    throw PreconditionError("functional F0 needs a non-increasing H, got " +
                            std::string(to_string(H.direction())));
  require_set_A(G);
  FunctionalValue v;
  v.value = -integrate(H.base(), G, G.base().interval(), cfg).value;
  v.by_parts = -by_parts_form(H, G, cfg);
  v.discrepancy = std::abs(v.value - v.by_parts);
  return v;
}

SurvivalCurve survival_integrator(const GridFn& f, const QuadratureConfig& cfg) {
  cfg.validate();
  for (double v : f.values())
    if (v < 0.0) throw PreconditionError("hazard f must be non-negative");
  if (f.tail() && f.tail()->limit < 0.0) throw PreconditionError("hazard f must have a limit >= 0");

  constexpr double kNegligible = 1e-18;
  constexpr std::size_t kMaxNodes = 20'000'000;
  const double step = cfg.max_hazard_step;
  const auto grid = f.grid();
  const auto vals = f.values();

  std::vector<double> xs{grid[0]};
  std::vector<double> gs{1.0};
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double len = grid[i + 1] - grid[i];
    const double f0 = vals[i], f1 = vals[i + 1];
    const double slope = (f1 - f0) / len;
    // PL error of exp(-F) scales with (f^2 + |f'|) * dx^2
    const double curvature = std::sqrt(std::max(f0 * f0, f1 * f1) + std::abs(slope));
    std::size_t m = static_cast<std::size_t>(cfg.panel_points - 1);
    if (gs.back() >= kNegligible)
      m = std::max(m, static_cast<std::size_t>(std::ceil(len * curvature / step)));
    else
      m = 1;
    for (std::size_t j = 1; j <= m; ++j) {
      const double t = (j == m) ? len : len * static_cast<double>(j) / static_cast<double>(m);
      xs.push_back(j == m ? grid[i + 1] : grid[i] + t);
      gs.push_back(std::exp(-(cum + t * (f0 + 0.5 * slope * t))));
    }
    cum += 0.5 * len * (f0 + f1);
    if (xs.size() > kMaxNodes) throw NumericalError("survival curve needs too many nodes");
  }

  if (!f.tail()) return {BVFn(GridFn(std::move(xs), std::move(gs))), false};

  const TailSpec& tail = *f.tail();
  const double lim = tail.limit;
  if (!tail.is_exponential() || f.last_value() == lim) {
    if (lim > 0.0)
      return {BVFn(GridFn(std::move(xs), std::move(gs), TailSpec::exponential(lim))), true};
    return {BVFn(GridFn(std::move(xs), std::move(gs), TailSpec::constant(gs.back()))), false};
  }

  // Exponential hazard tail: extend the grid until f has settled at its
  // limit (or g is negligible), then close with an exponential/constant tail.
  const double x_last = f.last_node();
  const double amp = f.last_value() - lim;
  const double lam = tail.rate;
  auto f_at = [&](double t) { return lim + amp * std::exp(-lam * t); };
  auto cum_at = [&](double t) { return cum + lim * t - amp * std::expm1(-lam * t) / lam; };
  auto settled = [&](double t) {
    const double rest = std::abs(amp) * std::exp(-lam * t);
    return lim > 0.0 ? rest <= 1e-12 * lim : rest / lam <= 1e-16;
  };
  double t = 0.0;
  while (!settled(t) && !(lim > 0.0 && gs.back() < kNegligible)) {
    const double fc = f_at(t);
    const double dfc = lam * std::abs(amp) * std::exp(-lam * t);
    double dt = step / std::sqrt(fc * fc + dfc);
    dt = std::min(dt, 1.0 / lam);
    t += dt;
    if (x_last + t > cfg.max_domain) throw NumericalError("survival curve exceeds max_domain");
    xs.push_back(x_last + t);
    gs.push_back(std::exp(-cum_at(t)));
    if (xs.size() > kMaxNodes) throw NumericalError("survival curve needs too many nodes");
  }
  if (lim > 0.0) {
    const double rate = std::max(f_at(t), lim);
    return {BVFn(GridFn(std::move(xs), std::move(gs), TailSpec::exponential(rate))), true};
  }
  return {BVFn(GridFn(std::move(xs), std::move(gs), TailSpec::constant(gs.back()))), false};
}

IResult functional_I(const MonotoneFn& h, const GridFn& f, const QuadratureConfig& cfg) {
  if (!h.non_decreasing())
    throw PreconditionError("functional I needs a non-decreasing h, got " +
                            std::string(to_string(h.direction())));
  if (!f.infinite()) throw PreconditionError("functional I integrates to infinity; f needs a tail");
  if (!h.base().infinite() || h.base().a() > f.a())
    throw DomainError("h must be defined on [a, inf) where f starts at a");
  const SurvivalCurve curve = survival_integrator(f, cfg);
  IResult r;
  r.integral = improper_stieltjes(h.base(), curve.g, f.a(), cfg);
  r.value = r.integral.value;
  r.hypothesis_warning = !curve.divergent;
  return r;
}

}  // namespace bvpop
