#include "bvpop/grid_fn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bvpop/errors.hpp"

namespace bvpop {

Interval::Interval(double a_, double b_) : a(a_), b(b_) {
  if (!std::isfinite(a) || std::isnan(b) || b == -kInf)
    throw InvalidArgument("interval endpoints must be a finite left end and a real or +inf right end");
  if (!(a < b)) throw InvalidArgument("interval requires a < b");
}

GridFn::GridFn(std::vector<double> grid, std::vector<double> values,
               std::optional<TailSpec> tail)
    : grid_(std::move(grid)), values_(std::move(values)), tail_(tail) {
  const std::size_t n = grid_.size();
  if (n < 2) throw InvalidArgument("grid function needs at least 2 nodes");
  if (values_.size() != n)
    throw InvalidArgument("grid and values differ in length (" + std::to_string(n) + " vs " +
                          std::to_string(values_.size()) + ")");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grid_[i]) || !std::isfinite(values_[i]))
      throw InvalidArgument("non-finite grid node or value at index " + std::to_string(i));
    if (i > 0 && !(grid_[i] > grid_[i - 1]))
      throw InvalidArgument("grid is not strictly increasing at index " + std::to_string(i));
  }
  if (tail_) {
    if (!std::isfinite(tail_->limit)) throw InvalidArgument("tail limit must be finite");
    if (tail_->is_exponential()) {
      if (!(tail_->rate > 0.0) || !std::isfinite(tail_->rate))
        throw InvalidArgument("exponential tail requires a finite rate > 0");
    } else {
      const double gap = std::abs(values_.back() - tail_->limit);
      if (gap > 1e-12 * std::max(1.0, std::abs(tail_->limit)))
        throw InvalidArgument("limit_value tail must equal the last node value (jumps are unsupported)");
      tail_->limit = values_.back();
      tail_->rate = 0.0;
    }
  }

  prefix_integral_.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    prefix_integral_[i] =
        prefix_integral_[i - 1] + 0.5 * (grid_[i] - grid_[i - 1]) * (values_[i] + values_[i - 1]);

  suffix_variation_.assign(n, 0.0);
  suffix_sup_.assign(n, 0.0);
  double tail_var = 0.0;
  double tail_sup = std::abs(values_.back());
  if (tail_) {
    if (tail_->is_exponential()) tail_var = std::abs(values_.back() - tail_->limit);
    tail_sup = std::max(tail_sup, std::abs(tail_->limit));
  }
  suffix_variation_[n - 1] = tail_var;
  suffix_sup_[n - 1] = tail_sup;
  for (std::size_t i = n - 1; i-- > 0;) {
    suffix_variation_[i] = suffix_variation_[i + 1] + std::abs(values_[i + 1] - values_[i]);
    suffix_sup_[i] = std::max(suffix_sup_[i + 1], std::abs(values_[i]));
  }
}

GridFn GridFn::constant(double c, double a) {
  return GridFn({a, a + 1.0}, {c, c}, TailSpec::constant(c));
}

double GridFn::right_value() const noexcept {
  return tail_ ? tail_->limit : values_.back();
}

std::size_t GridFn::segment_index(double x) const {
  if (x >= grid_.back()) return grid_.size() - 1;
  auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  if (it == grid_.begin()) return 0;
  return static_cast<std::size_t>(it - grid_.begin()) - 1;
}

double GridFn::tail_eval(double x) const noexcept {
  if (!tail_->is_exponential()) return tail_->limit;
  const double v = values_.back();
  return tail_->limit + (v - tail_->limit) * std::exp(-tail_->rate * (x - grid_.back()));
}

double GridFn::eval(double x) const {
  if (std::isnan(x)) throw DomainError("evaluation at NaN");
  if (x < grid_.front())
    throw DomainError("x = " + std::to_string(x) + " lies left of the domain start " +
                      std::to_string(grid_.front()));
  if (x >= grid_.back()) {
    if (x == grid_.back()) return values_.back();
    if (!tail_)
      throw DomainError("x = " + std::to_string(x) + " lies right of the domain end " +
                        std::to_string(grid_.back()));
    return tail_eval(x);
  }
  const std::size_t i = segment_index(x);
  if (grid_[i] == x) return values_[i];
  const double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return values_[i] + (values_[i + 1] - values_[i]) * t;
}

double GridFn::total_variation() const noexcept { return suffix_variation_.front(); }

double GridFn::variation_from(double x) const {
  if (x <= grid_.front()) return suffix_variation_.front();
  if (x >= grid_.back()) {
    if (!tail_ || !tail_->is_exponential()) return 0.0;
    return std::abs(values_.back() - tail_->limit) *
           std::exp(-tail_->rate * (x - grid_.back()));
  }
  const std::size_t i = segment_index(x);
  return std::abs(values_[i + 1] - eval(x)) + suffix_variation_[i + 1];
}

double GridFn::sup_abs_from(double x) const {
  if (x <= grid_.front()) return suffix_sup_.front();
  if (x >= grid_.back()) {
    double s = std::abs(x == grid_.back() || !tail_ ? values_.back() : tail_eval(x));
    if (tail_) s = std::max(s, std::abs(tail_->limit));
    return s;
  }
  const std::size_t i = segment_index(x);
  return std::max(std::abs(eval(x)), suffix_sup_[i + 1]);
}

double GridFn::tail_integral(double lo, double hi) const {
  // lo >= last node
  const double xl = grid_.back();
  const double lim = tail_->limit;
  double flat = 0.0;
  if (lim != 0.0) flat = (hi == kInf) ? std::copysign(kInf, lim) : lim * (hi - lo);
  if (!tail_->is_exponential()) return flat;
  const double lam = tail_->rate;
  const double amp = values_.back() - lim;
  const double e_lo = std::exp(-lam * (lo - xl));
  const double span = (hi == kInf) ? 1.0 : -std::expm1(-lam * (hi - lo));
  return flat + amp / lam * e_lo * span;
}

double GridFn::cumulative(double x) const {
  const std::size_t n = grid_.size();
  if (x >= grid_.back()) {
    if (x == grid_.back()) return prefix_integral_[n - 1];
    return prefix_integral_[n - 1] + tail_integral(grid_.back(), x);
  }
  const std::size_t i = segment_index(x);
  const double dx = x - grid_[i];
  const double slope = (values_[i + 1] - values_[i]) / (grid_[i + 1] - grid_[i]);
  return prefix_integral_[i] + dx * (values_[i] + 0.5 * slope * dx);
}

double GridFn::integral(double lo, double hi) const {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw DomainError("integral bounds must satisfy lo <= hi");
  if (lo < grid_.front() || hi > right_end())
    throw DomainError("integral bounds outside the function domain");
  if (lo == hi) return 0.0;
  const double xl = grid_.back();
  if (lo >= xl) return tail_integral(lo, hi);
  if (hi > xl) return (prefix_integral_.back() - cumulative(lo)) + tail_integral(xl, hi);
  return cumulative(hi) - cumulative(lo);
}

GridFn GridFn::refined(std::span<const double> extra_nodes) const {
  std::vector<double> nodes = merge_grids(grid_, extra_nodes, grid_.front(), grid_.back());
  std::vector<double> vals;
  vals.reserve(nodes.size());
  for (double x : nodes) vals.push_back(eval(x));
  return GridFn(std::move(nodes), std::move(vals), tail_);
}

std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::increasing: return "increasing";
    case Direction::non_decreasing: return "non_decreasing";
    case Direction::decreasing: return "decreasing";
    case Direction::non_increasing: return "non_increasing";
  }
  return "unknown";
}

std::optional<Direction> parse_direction(std::string_view s) noexcept {
  for (Direction d : {Direction::increasing, Direction::non_decreasing, Direction::decreasing,
                      Direction::non_increasing})
    if (to_string(d) == s) return d;
  return std::nullopt;
}

MonotoneClass classify_monotone(const GridFn& f, double tol) {
  bool all_up_strict = true, all_down_strict = true;
  bool all_up = true, all_down = true;
  auto step = [&](double d) {
    all_up_strict = all_up_strict && d > tol;
    all_down_strict = all_down_strict && d < -tol;
    all_up = all_up && d >= -tol;
    all_down = all_down && d <= tol;
  };
  const auto v = f.values();
  for (std::size_t i = 1; i < v.size(); ++i) step(v[i] - v[i - 1]);
  if (f.tail() && f.tail()->is_exponential()) step(f.tail()->limit - v.back());

  MonotoneClass c;
  c.constant = all_up && all_down;
  if (all_up_strict)
    c.direction = Direction::increasing;
  else if (all_down_strict)
    c.direction = Direction::decreasing;
  else if (all_up)
    c.direction = Direction::non_decreasing;
  else if (all_down)
    c.direction = Direction::non_increasing;
  return c;
}

bool satisfies(const MonotoneClass& c, Direction declared) noexcept {
  if (!c.direction) return false;
  const Direction d = *c.direction;
  switch (declared) {
    case Direction::increasing: return d == Direction::increasing;
    case Direction::decreasing: return d == Direction::decreasing;
    case Direction::non_decreasing:
      return d == Direction::increasing || d == Direction::non_decreasing || c.constant;
    case Direction::non_increasing:
      return d == Direction::decreasing || d == Direction::non_increasing || c.constant;
  }
  return false;
}

MonotoneFn::MonotoneFn(GridFn base, Direction direction)
    : base_(std::move(base)), direction_(direction) {
  if (!satisfies(classify_monotone(base_), direction_))
    throw InvalidArgument("node values are not " + std::string(to_string(direction_)));
  for (double v : base_.values())
    if (v < 0.0) throw InvalidArgument("monotone function must be non-negative");
  if (base_.tail() && base_.tail()->limit < 0.0)
    throw InvalidArgument("monotone function must have a non-negative limit");
  bound_ = base_.sup_abs();
}

BVFn::BVFn(GridFn base) : base_(std::move(base)), right_value_(base_.right_value()) {}

bool BVFn::in_set_A(double eps) const noexcept { return std::abs(right_value_) <= eps; }

std::vector<double> merge_grids(std::span<const double> lhs, std::span<const double> rhs,
                                double lo, double hi) {
  std::vector<double> out;
  out.reserve(lhs.size() + rhs.size() + 2);
  out.push_back(lo);
  for (double x : lhs)
    if (x > lo && x < hi) out.push_back(x);
  for (double x : rhs)
    if (x > lo && x < hi) out.push_back(x);
  if (hi > lo) out.push_back(hi);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace bvpop
