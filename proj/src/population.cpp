#include "bvpop/population.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "bvpop/format.hpp"

namespace bvpop {

namespace {

GridFn attach_zero_tail(GridFn u) {
  if (u.infinite()) return u;
  if (u.last_value() != 0.0)
    throw InvalidArgument("density on a finite grid must vanish at its last node");
  std::vector<double> g(u.grid().begin(), u.grid().end());
  std::vector<double> v(u.values().begin(), u.values().end());
  return GridFn(std::move(g), std::move(v), TailSpec::constant(0.0));
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  return s;
}

// Exact integral of the product of two linear pieces over [x0, x1].
double linear_product(double x0, double x1, double a0, double a1, double b0, double b1) {
  const double am = 0.5 * (a0 + a1), bm = 0.5 * (b0 + b1);
  return (x1 - x0) / 6.0 * (a0 * b0 + 4.0 * am * bm + a1 * b1);
}

double interp_clamped(std::span<const double> xs, std::span<const double> ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + t * (ys[j] - ys[j - 1]);
}

// int w(x_nodes[row], y) u(y) dy for a custom kernel.
double custom_row(const Density& u, const EnvironmentKernel& k, std::size_t row) {
  const std::size_t ny = k.y_nodes.size();
  std::span<const double> w(k.weights.data() + row * ny, ny);
  const double lo = k.y_nodes.front(), hi = k.y_nodes.back();
  std::vector<double> pts = merge_grids(k.y_nodes, u.fn().grid(), lo, hi);
  // pieces beyond the last node of u are not linear in u; subdivide them
  std::vector<double> fine;
  fine.reserve(pts.size());
  const double last = u.fn().last_node();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    fine.push_back(pts[i]);
    if (pts[i] >= last) {
      for (int s = 1; s < 16; ++s) fine.push_back(pts[i] + (pts[i + 1] - pts[i]) * s / 16.0);
    }
  }
  fine.push_back(pts.back());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
    const double y0 = fine[i], y1 = fine[i + 1];
    sum += linear_product(y0, y1, interp_clamped(k.y_nodes, w, y0), interp_clamped(k.y_nodes, w, y1),
                          u(y0), u(y1));
  }
  return sum;
}

// E(x; u) at every grid node.
std::vector<double> environment_profile(const Density& u, const EnvironmentKernel& k,
                                        std::span<const double> grid) {
  std::vector<double> E(grid.size(), 0.0);
  if (u.is_zero()) return E;
  switch (k.kind) {
    case EnvironmentKernel::Kind::total:
      std::fill(E.begin(), E.end(), u.total());
      break;
    case EnvironmentKernel::Kind::window:
      for (std::size_t i = 0; i < grid.size(); ++i)
        E[i] = u.fn().integral(grid[i], grid[i] + k.width);
      break;
    case EnvironmentKernel::Kind::above:
      for (std::size_t i = 0; i < grid.size(); ++i) E[i] = u.fn().integral(grid[i], kInf);
      break;
    case EnvironmentKernel::Kind::custom: {
      std::vector<double> rows(k.x_nodes.size());
      for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = custom_row(u, k, r);
      for (std::size_t i = 0; i < grid.size(); ++i) E[i] = interp_clamped(k.x_nodes, rows, grid[i]);
      break;
    }
  }
  return E;
}

std::vector<double> rate_profile(const RateSpec& rate, const Density& u,
                                 std::span<const double> grid) {
  std::vector<double> r(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) r[i] = rate.base.eval(grid[i]);
  if (rate.modulation.active() && !u.is_zero()) {
    const std::vector<double> E = environment_profile(u, rate.modulation.kernel, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) r[i] *= rate.modulation.phi(E[i]);
  }
  return r;
}

void validate_base(const GridFn& f, const char* name) {
  if (f.a() != 0.0) throw InvalidArgument(std::string(name) + " must start at x = 0");
  if (!f.infinite()) throw InvalidArgument(std::string(name) + " needs a tail on [0, inf)");
  for (double v : f.values())
    if (!std::isfinite(v)) throw InvalidArgument(std::string(name) + " has non-finite values");
}

void validate_modulation(const Modulation& m, const char* name) {
  if (!(m.c >= 0.0) || !std::isfinite(m.c))
    throw InvalidArgument(std::string(name) + ": modulation strength c must be finite and >= 0");
  m.kernel.validate();
}

// Smallest node value or limit of a base profile.
double min_value(const GridFn& f) {
  double m = f.right_value();
  for (double v : f.values()) m = std::min(m, v);
  return m;
}

bool decreasing_response(const Modulation& m) {
  return !m.active() || m.response == Response::exp_decay || m.response == Response::hill;
}

bool increasing_response(const Modulation& m) {
  return !m.active() || m.response == Response::linear_up;
}

// True when beta/mu is non-decreasing along the nodes (relative tolerance).
bool ratio_non_decreasing(std::span<const double> beta, std::span<const double> mu) {
  double prev = -kInf;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (!(mu[i] > 0.0)) return false;
    const double r = beta[i] / mu[i];
    if (r < prev - 1e-12 * std::max(1.0, std::abs(prev))) return false;
    prev = std::max(prev, r);
  }
  return true;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Rate of an exponential tail for u = B Pi: fitted to the last two decades of
// Pi, falling back to the hazard at the last node.
double fitted_tail_rate(const SurvivalProfile& p) {
  const std::size_t n = p.x.size();
  const double last = p.Pi[n - 1];
  if (last > 0.0) {
    for (std::size_t j = n - 1; j-- > 0;) {
      if (p.Pi[j] >= 100.0 * last) {
        const double rate = std::log(p.Pi[j] / last) / (p.x[n - 1] - p.x[j]);
        if (std::isfinite(rate) && rate > 0.0) return rate;
        break;
      }
    }
  }
  const double f = p.hazard[n - 1];
  return f > 0.0 ? f : 1.0;
}

Density density_from(std::span<const double> grid, std::vector<double> values, double tail_rate) {
  for (double& v : values) v = std::max(v, 0.0);
  return Density(GridFn(std::vector<double>(grid.begin(), grid.end()), std::move(values),
                        TailSpec::exponential(tail_rate, 0.0)));
}

double l1_distance(std::span<const double> x, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    s += 0.5 * (x[i + 1] - x[i]) * (std::abs(a[i] - b[i]) + std::abs(a[i + 1] - b[i + 1]));
  return s;
}

}  // namespace

// ---- Density ----

Density::Density(GridFn u) : u_(attach_zero_tail(std::move(u))), total_(0.0) {
  if (u_.a() != 0.0) throw InvalidArgument("density must start at x = 0");
  for (double v : u_.values())
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("density values must be finite and >= 0");
  const TailSpec& t = *u_.tail();
  if (t.limit != 0.0) throw InvalidArgument("density tail must decay to 0");
  if (t.is_exponential() && !(t.rate > 0.0))
    throw InvalidArgument("density tail rate must be > 0");
  total_ = u_.integral(0.0, kInf);
  if (!std::isfinite(total_)) throw InvalidArgument("density is not integrable");
}

Density Density::zero() { return Density(GridFn({0.0, 1.0}, {0.0, 0.0}, TailSpec::constant(0.0))); }

bool Density::is_zero() const noexcept {
  return std::all_of(u_.values().begin(), u_.values().end(), [](double v) { return v == 0.0; });
}

// ---- kernels and responses ----

EnvironmentKernel EnvironmentKernel::window(double width) {
  EnvironmentKernel k;
  k.kind = Kind::window;
  k.width = width;
  k.validate();
  return k;
}

EnvironmentKernel EnvironmentKernel::above() {
  EnvironmentKernel k;
  k.kind = Kind::above;
  return k;
}

EnvironmentKernel EnvironmentKernel::custom(std::vector<double> x_nodes, std::vector<double> y_nodes,
                                            std::vector<double> weights) {
  EnvironmentKernel k;
  k.kind = Kind::custom;
  k.x_nodes = std::move(x_nodes);
  k.y_nodes = std::move(y_nodes);
  k.weights = std::move(weights);
  k.validate();
  return k;
}

void EnvironmentKernel::validate() const {
  switch (kind) {
    case Kind::total:
    case Kind::above:
      return;
    case Kind::window:
      if (!(width > 0.0) || !std::isfinite(width))
        throw InvalidArgument("window kernel width must be finite and > 0");
      return;
    case Kind::custom: {
      auto increasing = [](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (!std::isfinite(v[i])) return false;
          if (i > 0 && !(v[i] > v[i - 1])) return false;
        }
        return true;
      };
      if (x_nodes.empty() || !increasing(x_nodes))
        throw InvalidArgument("custom kernel x_nodes must be non-empty and strictly increasing");
      if (y_nodes.size() < 2 || !increasing(y_nodes))
        throw InvalidArgument("custom kernel y_nodes needs >= 2 strictly increasing values");
      if (y_nodes.front() < 0.0) throw InvalidArgument("custom kernel y_nodes must be >= 0");
      if (weights.size() != x_nodes.size() * y_nodes.size())
        throw InvalidArgument("custom kernel weights must have x_nodes.size() * y_nodes.size() entries");
      for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w))
          throw InvalidArgument("custom kernel weights must be finite and >= 0");
      return;
    }
  }
}

double EnvironmentKernel::weight(double x, double y) const {
  switch (kind) {
    case Kind::total: return 1.0;
    case Kind::window: return (y >= x && y <= x + width) ? 1.0 : 0.0;
    case Kind::above: return y >= x ? 1.0 : 0.0;
    case Kind::custom: {
      if (y < y_nodes.front() || y > y_nodes.back()) return 0.0;
      const std::size_t ny = y_nodes.size();
      std::vector<double> col(x_nodes.size());
      for (std::size_t i = 0; i < x_nodes.size(); ++i)
        col[i] = interp_clamped(y_nodes, std::span<const double>(weights.data() + i * ny, ny), y);
      return interp_clamped(x_nodes, col, x);
    }
  }
  return 0.0;
}

std::string_view to_string(EnvironmentKernel::Kind k) noexcept {
  switch (k) {
    case EnvironmentKernel::Kind::total: return "total";
    case EnvironmentKernel::Kind::window: return "window";
    case EnvironmentKernel::Kind::above: return "above";
    case EnvironmentKernel::Kind::custom: return "custom";
  }
  return "unknown";
}

double environment_E(const Density& u, const EnvironmentKernel& kernel, double x) {
  kernel.validate();
  if (!(x >= 0.0)) throw DomainError("environment_E needs x >= 0");
  const double xs[1] = {x};
  return environment_profile(u, kernel, xs)[0];
}

std::string_view to_string(Response r) noexcept {
  switch (r) {
    case Response::none: return "none";
    case Response::exp_decay: return "exp_decay";
    case Response::hill: return "hill";
    case Response::linear_up: return "linear_up";
  }
  return "unknown";
}

std::optional<Response> parse_response(std::string_view s) noexcept {
  for (Response r : {Response::none, Response::exp_decay, Response::hill, Response::linear_up})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

double Modulation::phi(double E) const noexcept {
  switch (response) {
    case Response::none: return 1.0;
    case Response::exp_decay: return std::exp(-c * E);
    case Response::hill: return 1.0 / (1.0 + c * E);
    case Response::linear_up: return 1.0 + c * E;
  }
  return 1.0;
}

void VitalRates::validate() const {
  validate_base(beta.base, "beta");
  validate_base(mu.base, "mu");
  validate_base(growth.base, "growth");
  validate_modulation(beta.modulation, "beta");
  validate_modulation(mu.modulation, "mu");
  validate_modulation(growth.modulation, "growth");
  if (min_value(beta.base) < 0.0) throw InvalidArgument("beta must be >= 0");
  if (min_value(mu.base) < 0.0) throw InvalidArgument("mu must be >= 0");
  if (!(mu.base.right_value() > 0.0))
    throw InvalidArgument("mu needs a positive limit at infinity so that survival decays");
  if (!(min_value(growth.base) > 0.0)) throw SingularityError("growth must be > 0");
}

// ---- monotone mode ----

std::string MonotoneMode::describe() const {
  std::string s;
  auto add = [&](bool ok, const char* what) {
    if (!s.empty()) s += ", ";
    s += what;
    s += ok ? "=yes" : "=no";
  };
  add(beta_non_increasing, "beta_non_increasing_in_u");
  add(mu_non_decreasing, "mu_non_decreasing_in_u");
  add(growth_non_increasing, "growth_non_increasing_in_u");
  add(profile_ok, "beta_over_mu_non_decreasing_in_x");
  return s;
}

MonotoneMode monotone_mode(const VitalRates& rates) {
  MonotoneMode m;
  m.beta_non_increasing = decreasing_response(rates.beta.modulation);
  m.mu_non_decreasing = increasing_response(rates.mu.modulation);
  m.growth_non_increasing = decreasing_response(rates.growth.modulation);
  if (!rates.growth.modulation.active()) {
    m.profile_ok = true;
  } else {
    const double last = std::max(rates.beta.base.last_node(), rates.mu.base.last_node());
    std::vector<double> xs = merge_grids(rates.beta.base.grid(), rates.mu.base.grid(), 0.0, last);
    std::vector<double> b, mu;
    for (double x : xs) {
      b.push_back(rates.beta.base.eval(x));
      mu.push_back(rates.mu.base.eval(x));
    }
    b.push_back(rates.beta.base.right_value());
    mu.push_back(rates.mu.base.right_value());
    m.profile_ok = ratio_non_decreasing(b, mu);
  }
  return m;
}

// ---- configuration ----

void PopulationConfig::validate() const {
  quad.validate();
  if (!(max_step > 0.0) || !std::isfinite(max_step)) throw InvalidArgument("max_step must be > 0");
  if (!(hazard_step > 0.0) || !(hazard_step < 1.0))
    throw InvalidArgument("hazard_step must lie in (0, 1)");
  if (!(hazard_span > 0.0) || !std::isfinite(hazard_span))
    throw InvalidArgument("hazard_span must be > 0");
}

void SolverConfig::validate() const {
  for (double t : {tol_R, tol_inner, tol_fix, bisection_tol})
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("solver tolerances must be > 0");
  if (max_inner < 1 || max_outer < 1) throw InvalidArgument("iteration limits must be >= 1");
  if (!(damping > 0.0) || !(damping <= 1.0)) throw InvalidArgument("damping must lie in (0, 1]");
}

// ---- grid and survival ----

std::vector<double> model_grid(const VitalRates& rates, const PopulationConfig& cfg) {
  rates.validate();
  cfg.validate();
  std::vector<double> base = merge_grids(rates.beta.base.grid(), rates.mu.base.grid(), 0.0, kInf);
  base = merge_grids(base, rates.growth.base.grid(), 0.0, kInf);
  auto hazard = [&](double x) { return rates.mu.base.eval(x) / rates.growth.base.eval(x); };

  constexpr std::size_t kMaxNodes = 20'000'000;
  std::vector<double> xs{0.0};
  std::size_t next_base = 1;
  double x = 0.0, f = hazard(0.0), cum = 0.0;
  while (cum < cfg.hazard_span) {
    double step = cfg.max_step;
    if (f > 0.0) step = std::min(step, cfg.hazard_step / f);
    const double f_trial = hazard(x + step);
    if (f_trial > 0.0) step = std::min(step, cfg.hazard_step / f_trial);
    while (next_base < base.size() && base[next_base] <= x) ++next_base;
    double x_next = x + step;
    if (next_base < base.size() && base[next_base] < x_next) x_next = base[next_base];
    if (x_next > cfg.quad.max_domain || xs.size() >= kMaxNodes)
      throw TruncationError("cumulative hazard stays below hazard_span up to x = " + format_real(x),
                            cum, kInf);
    const double f_next = hazard(x_next);
    cum += 0.5 * (x_next - x) * (f + f_next);
    xs.push_back(x_next);
    x = x_next;
    f = f_next;
  }
  return xs;
}

SurvivalProfile survival_profile(const VitalRates& rates, const Density& u,
                                 std::span<const double> grid) {
  if (grid.size() < 2 || grid.front() != 0.0) throw InvalidArgument("profile grid must start at 0");
  SurvivalProfile p;
  p.x.assign(grid.begin(), grid.end());
  p.beta = rate_profile(rates.beta, u, grid);
  p.mu = rate_profile(rates.mu, u, grid);
  p.growth = rate_profile(rates.growth, u, grid);
  const std::size_t n = grid.size();
  p.hazard.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p.growth[i] > 0.0))
      throw SingularityError("growth rate is not positive at x = " + format_real(grid[i]));
    p.hazard[i] = p.mu[i] / p.growth[i];
  }
  p.survival.resize(n);
  p.survival[0] = 1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dx = grid[i + 1] - grid[i];
    const double num = 1.0 - 0.5 * dx * p.hazard[i];
    if (num < 0.0)
      throw NumericalError("hazard step too large on the model grid at x = " + format_real(grid[i]) +
                           "; decrease hazard_step");
    p.survival[i + 1] = p.survival[i] * num / (1.0 + 0.5 * dx * p.hazard[i + 1]);
  }
  p.Pi.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.Pi[i] = p.survival[i] / p.growth[i];
  return p;
}

double survival_Pi(double x, const Density& u, const VitalRates& rates, const PopulationConfig& cfg) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("survival_Pi needs finite x >= 0");
  if (x == 0.0) {
    const double g = rate_profile(rates.growth, u, std::vector<double>{0.0})[0];
    if (!(g > 0.0)) throw SingularityError("growth rate is not positive at x = 0");
    return 1.0 / g;
  }
  std::vector<double> grid = model_grid(rates, cfg);
  const double step = grid.back() - grid[grid.size() - 2];
  while (grid.back() < x) grid.push_back(std::min(x, grid.back() + step));
  grid.erase(std::upper_bound(grid.begin(), grid.end(), x), grid.end());
  if (grid.back() != x) grid.push_back(x);
  return survival_profile(rates, u, grid).Pi.back();
}

namespace {

IntegralResult reproduction_from_profile(const SurvivalProfile& p, double tail_tol) {
  const std::size_t n = p.x.size();
  std::vector<double> bp(n);
  for (std::size_t i = 0; i < n; ++i) bp[i] = p.beta[i] * p.Pi[i];
  IntegralResult r;
  r.value = trapezoid(p.x, bp);

  // beyond the grid the rates are continued by their last values
  const double bN = p.beta[n - 1], sN = p.survival[n - 1], muN = p.mu[n - 1];
  if (bN * sN > 0.0 && !(muN > 0.0))
    throw TruncationError("integrand beta * Pi does not decay", r.value, kInf);
  const double closure = bN > 0.0 ? bN * sN / muN : 0.0;
  r.value += closure;

  // first node beyond which sup(beta/mu) * survival < tail_tol
  double sup_h = muN > 0.0 ? bN / muN : (bN > 0.0 ? kInf : 0.0);
  std::optional<double> cut;
  for (std::size_t j = n; j-- > 0;) {
    const double h = p.mu[j] > 0.0 ? p.beta[j] / p.mu[j] : (p.beta[j] > 0.0 ? kInf : 0.0);
    sup_h = std::max(sup_h, h);
    if (sup_h * p.survival[j] < tail_tol) cut = p.x[j];
    else break;
  }
  if (!cut)
    throw TruncationError("survival has not decayed below tail_tol at x = " + format_real(p.x[n - 1]),
                          r.value, sup_h * sN);
  r.truncation_point = cut;
  r.est_tail_error = closure;
  return r;
}

}  // namespace

IntegralResult net_reproduction_R(const Density& u, const VitalRates& rates,
                                  const PopulationConfig& cfg) {
  const std::vector<double> grid = model_grid(rates, cfg);
  return reproduction_from_profile(survival_profile(rates, u, grid), cfg.quad.tail_tol);
}

double net_reproduction_R_stieltjes(const Density& u, const VitalRates& rates,
                                    const PopulationConfig& cfg) {
  const std::vector<double> grid = model_grid(rates, cfg);
  const SurvivalProfile p = survival_profile(rates, u, grid);
  std::vector<double> h(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(p.mu[i] > 0.0))
      throw PreconditionError("Stieltjes form of R needs mu > 0 (x = " + format_real(grid[i]) + ")");
    h[i] = p.beta[i] / p.mu[i];
  }
  const GridFn hf(grid, h, TailSpec::constant(h.back()));
  const GridFn ff(grid, p.hazard, TailSpec::constant(p.hazard.back()));
  const SurvivalCurve s = survival_integrator(ff, cfg.quad);
  return improper_stieltjes(hf, s.g, 0.0, cfg.quad).value;
}

double birth_functional_G(const Density& u, const VitalRates& rates) {
  if (u.is_zero()) return 0.0;
  const GridFn& f = u.fn();
  const double last = f.last_node();
  const std::vector<double> xs = merge_grids(f.grid(), rates.beta.base.grid(), 0.0, last);
  const std::vector<double> beta = rate_profile(rates.beta, u, xs);
  std::vector<double> bu(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) bu[i] = beta[i] * f.eval(xs[i]);
  return trapezoid(xs, bu) + beta.back() * f.integral(last, kInf);
}

double stationary_residual(const Density& u, const VitalRates& rates, const PopulationConfig& cfg) {
  const std::vector<double> grid = model_grid(rates, cfg);
  const SurvivalProfile p = survival_profile(rates, u, grid);
  const double G = birth_functional_G(u, rates);
  std::vector<double> uv(grid.size()), target(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    uv[i] = u(grid[i]);
    target[i] = G * p.Pi[i];
  }
  double res = l1_distance(grid, uv, target);
  const std::size_t n = grid.size();
  const double target_tail = p.hazard[n - 1] > 0.0 ? G * p.Pi[n - 1] / p.hazard[n - 1] : 0.0;
  res += std::abs(u.fn().integral(grid.back(), kInf) - target_tail);
  return res;
}

// ---- equilibrium ----

std::string_view to_string(EquilibriumResult::Status s) noexcept {
  switch (s) {
    case EquilibriumResult::Status::converged: return "converged";
    case EquilibriumResult::Status::no_crossing: return "no_crossing";
    case EquilibriumResult::Status::not_converged: return "not_converged";
  }
  return "unknown";
}

namespace {

struct InnerState {
  Density u = Density::zero();
  SurvivalProfile profile;  // at u
  double R = 0.0;
  int iterations = 0;
};

InnerState inner_fixed_point(const VitalRates& rates, std::span<const double> grid, double B,
                             const PopulationConfig& cfg, const SolverConfig& solver) {
  InnerState s;
  s.profile = survival_profile(rates, s.u, grid);
  std::vector<double> cur(grid.size(), 0.0), next(grid.size());
  double change = kInf;
  const double d = solver.damping;
  while (true) {
    if (s.iterations >= solver.max_inner)
      throw InnerIterationError("inner fixed point did not settle for B = " + format_real(B) +
                                    " (last L1 change " + format_real(change) + ")",
                                B, change, s.iterations);
    for (std::size_t i = 0; i < grid.size(); ++i)
      next[i] = (1.0 - d) * cur[i] + d * B * s.profile.Pi[i];
    change = l1_distance(grid, cur, next);
    cur.swap(next);
    s.u = density_from(grid, cur, fitted_tail_rate(s.profile));
    s.profile = survival_profile(rates, s.u, grid);
    ++s.iterations;
    if (change < solver.tol_inner) break;
  }
  s.R = reproduction_from_profile(s.profile, cfg.quad.tail_tol).value;
  return s;
}

}  // namespace

EquilibriumResult solve_equilibrium(const VitalRates& rates, const PopulationConfig& cfg,
                                    const SolverConfig& solver, std::pair<double, double> bracket) {
  solver.validate();
  auto [lo, hi] = bracket;
  if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi))
    throw InvalidArgument("B bracket must satisfy 0 <= lo < hi < inf");
  const std::vector<double> grid = model_grid(rates, cfg);

  EquilibriumResult res;
  res.R_zero = reproduction_from_profile(survival_profile(rates, Density::zero(), grid),
                                         cfg.quad.tail_tol).value;

  InnerState s_lo = inner_fixed_point(rates, grid, lo, cfg, solver);
  InnerState s_hi = inner_fixed_point(rates, grid, hi, cfg, solver);
  res.inner_iterations = s_lo.iterations + s_hi.iterations;
  double f_lo = s_lo.R - 1.0, f_hi = s_hi.R - 1.0;
  res.bracket_values = {f_lo, f_hi};
  if ((f_lo > 0.0 && f_hi > 0.0) || (f_lo < 0.0 && f_hi < 0.0) || (f_lo == 0.0 && f_hi == 0.0)) {
    res.status = EquilibriumResult::Status::no_crossing;
    return res;
  }

  InnerState best = std::abs(f_lo) <= std::abs(f_hi) ? s_lo : s_hi;
  double B_best = std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
  if (f_lo != 0.0 && f_hi != 0.0) {
    while (hi - lo >= solver.bisection_tol && res.outer_iterations < solver.max_outer) {
      const double mid = 0.5 * (lo + hi);
      InnerState s = inner_fixed_point(rates, grid, mid, cfg, solver);
      ++res.outer_iterations;
      res.inner_iterations += s.iterations;
      const double fm = s.R - 1.0;
      if (fm == 0.0) {
        best = std::move(s);
        B_best = mid;
        break;
      }
      if ((fm > 0.0) == (f_lo > 0.0)) {
        lo = mid;
        f_lo = fm;
      } else {
        hi = mid;
        f_hi = fm;
      }
      best = std::move(s);
      B_best = mid;
    }
  }

  res.B_star = B_best;
  res.R_at_star = best.R;
  res.G_at_star = birth_functional_G(best.u, rates);
  res.residual = stationary_residual(best.u, rates, cfg);
  res.u_star = best.u;
  res.profile = std::move(best.profile);
  res.converged = std::abs(res.R_at_star - 1.0) <= solver.tol_R && res.residual <= solver.tol_fix;
  res.status = res.converged ? EquilibriumResult::Status::converged
                             : EquilibriumResult::Status::not_converged;
  return res;
}

// ---- monotonicity and threshold ----

RMonotoneCheck check_R_monotone(const VitalRates& rates, const Density& u1, const Density& u2,
                                const PopulationConfig& cfg) {
  const MonotoneMode mode = monotone_mode(rates);
  if (!mode.all())
    throw PreconditionError("rates are not in monotone mode (" + mode.describe() + ")");
  require_ordered(u1.fn(), u2.fn(), "check_R_monotone needs u1 <= u2");

  const std::vector<double> grid = model_grid(rates, cfg);
  const SurvivalProfile p1 = survival_profile(rates, u1, grid);
  const SurvivalProfile p2 = survival_profile(rates, u2, grid);
  if (rates.growth.modulation.active() && !ratio_non_decreasing(p2.beta, p2.mu))
    throw PreconditionError("beta/mu is not non-decreasing in x at u2");

  RMonotoneCheck c;
  c.R1 = reproduction_from_profile(p1, cfg.quad.tail_tol).value;
  c.R2 = reproduction_from_profile(p2, cfg.quad.tail_tol).value;
  c.delta = c.R2 - c.R1;
  c.ok = c.delta <= 1e-8;
  return c;
}

std::string_view to_string(ThresholdReport::Conclusion c) noexcept {
  switch (c) {
    case ThresholdReport::Conclusion::expected: return "expected";
    case ThresholdReport::Conclusion::excluded: return "excluded";
    case ThresholdReport::Conclusion::indeterminate: return "indeterminate";
  }
  return "unknown";
}

ThresholdReport threshold_report(const VitalRates& rates, const PopulationConfig& cfg) {
  ThresholdReport r;
  r.R_zero = net_reproduction_R(Density::zero(), rates, cfg).value;
  r.mode = monotone_mode(rates);
  const std::string R0 = fmt_short(r.R_zero);
  if (r.R_zero > 1.0) {
    r.conclusion = ThresholdReport::Conclusion::expected;
    r.message = "nontrivial equilibrium expected (R(0)=" + R0 + ">1)";
  } else if (r.R_zero < 1.0 && r.mode.all()) {
    r.conclusion = ThresholdReport::Conclusion::excluded;
    r.message = "excluded (R(0)=" + R0 + "<1, R monotone)";
  } else {
    r.conclusion = ThresholdReport::Conclusion::indeterminate;
    r.message = r.R_zero < 1.0 ? "indeterminate (R(0)=" + R0 + "<1, R not known to be monotone)"
                               : "indeterminate (R(0)=" + R0 + ")";
  }
  return r;
}

// ---- randomized monotonicity suite ----

namespace {

GridFn saturating(double x_end, std::size_t n, double v0, double amp, double scale) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = x_end * static_cast<double>(i) / static_cast<double>(n - 1);
  return GridFn::sample(xs, [&](double x) { return v0 * (1.0 + amp * (1.0 - std::exp(-x / scale))); },
                        TailSpec::constant(0.0));
}

Modulation random_modulation(Rng& rng, std::initializer_list<Response> allowed, bool x_monotone_kernel,
                             double c_max) {
  Modulation m;
  const int pick = rng.integer(0, static_cast<int>(allowed.size()));
  if (pick == 0) return m;
  m.response = *(allowed.begin() + (pick - 1));
  m.c = rng.uniform(0.0, c_max);
  const int kernel = rng.integer(0, x_monotone_kernel ? 1 : 3);
  switch (kernel) {
    case 0: m.kernel = EnvironmentKernel::total(); break;
    case 1: m.kernel = EnvironmentKernel::above(); break;
    case 2: m.kernel = EnvironmentKernel::window(rng.uniform(0.5, 5.0)); break;
    default: {
      std::vector<double> xn{0.0, 2.0, 6.0}, yn{0.0, 1.0, 3.0, 8.0};
      std::vector<double> w(xn.size() * yn.size());
      for (double& v : w) v = rng.uniform(0.0, 1.5);
      m.kernel = EnvironmentKernel::custom(xn, yn, w);
    }
  }
  return m;
}

}  // namespace

MonotoneRatesInstance gen_monotone_instance(Rng& rng) {
  const double x_end = 20.0;
  const std::size_t n = 41;
  const bool growth_modulated = rng.coin();

  GridFn mu_base = saturating(x_end, n, rng.uniform(0.3, 2.0), rng.uniform(0.0, 1.0), rng.uniform(1.0, 5.0));
  // beta = h * mu with h non-decreasing in x
  GridFn h = saturating(x_end, n, rng.uniform(0.5, 3.0), rng.uniform(0.0, 1.0), rng.uniform(0.5, 4.0));
  std::vector<double> bv(n);
  for (std::size_t i = 0; i < n; ++i) bv[i] = h.values()[i] * mu_base.values()[i];
  GridFn beta_base(std::vector<double>(mu_base.grid().begin(), mu_base.grid().end()), bv,
                   TailSpec::constant(bv.back()));
  GridFn growth_base = saturating(x_end, n, rng.uniform(0.5, 2.0), rng.uniform(-0.5, 0.5), rng.uniform(1.0, 5.0));

  Modulation mb = random_modulation(rng, {Response::exp_decay, Response::hill}, growth_modulated, 0.5);
  Modulation mm = random_modulation(rng, {Response::linear_up}, growth_modulated, 0.5);
  Modulation mg;
  if (growth_modulated) {
    mg.response = rng.coin() ? Response::exp_decay : Response::hill;
    mg.c = rng.uniform(0.05, 0.5);
    mg.kernel = rng.coin() ? EnvironmentKernel::total() : EnvironmentKernel::above();
  } else if (!mb.active() && !mm.active()) {
    mm.response = Response::linear_up;
    mm.c = rng.uniform(0.05, 0.5);
  }

  VitalRates rates{RateSpec(std::move(beta_base), mb), RateSpec(std::move(mu_base), mm),
                   RateSpec(std::move(growth_base), mg)};

  // u1 = A exp(-lambda x); u2 = (1 + s) u1 + bump, bump vanishing at the last node
  const double lambda = rng.uniform(0.5, 3.0);
  const double A = rng.uniform(0.1, 2.0) * lambda;
  const double u_end = 25.0 / lambda;
  std::vector<double> ux(201);
  for (std::size_t i = 0; i < ux.size(); ++i) ux[i] = u_end * static_cast<double>(i) / 200.0;
  const double s = rng.coin() ? rng.uniform(0.01, 1.0) : 0.0;
  const double bump_h = (s == 0.0 || rng.coin()) ? rng.uniform(0.05, 1.0) : 0.0;
  const double bump_c = rng.uniform(0.0, 0.5 * u_end), bump_w = rng.uniform(0.2, 3.0);
  std::vector<double> v1(ux.size()), v2(ux.size());
  for (std::size_t i = 0; i < ux.size(); ++i) {
    v1[i] = A * std::exp(-lambda * ux[i]);
    const double bump = bump_h * std::max(0.0, 1.0 - std::abs(ux[i] - bump_c) / bump_w);
    v2[i] = (1.0 + s) * v1[i] + (i + 1 == ux.size() ? 0.0 : bump);
  }
  Density u1(GridFn(ux, v1, TailSpec::exponential(lambda)));
  Density u2(GridFn(ux, v2, TailSpec::exponential(lambda)));
  return {std::move(rates), std::move(u1), std::move(u2)};
}

SuiteReport run_R_monotone_suite(std::size_t n_instances, std::uint64_t seed,
                                 const PopulationConfig& cfg, unsigned threads) {
  cfg.validate();
  return collect_suite(n_instances, seed, threads, [&](std::uint64_t i) {
    Rng rng = Rng::for_instance(seed, i);
    const MonotoneRatesInstance inst = gen_monotone_instance(rng);
    const RMonotoneCheck c = check_R_monotone(inst.rates, inst.u1, inst.u2, cfg);
    return std::vector<SuiteRow>{{i, "R_monotone", -c.delta, c.ok, true}};
  });
}

}  // namespace bvpop
