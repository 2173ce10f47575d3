#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace bvpop {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Tie tolerance for strict monotonicity of node values.
inline constexpr double kMonotoneTol = 1e-12;

/// Tolerance on |right value| for membership in the admissible set A.
inline constexpr double kSetATol = 1e-9;

/// [a, b] or [a, inf).
struct Interval {
  double a = 0.0;
  double b = 1.0;

  Interval() = default;
  Interval(double a, double b);

  bool infinite() const noexcept { return b == kInf; }
  bool contains(double x) const noexcept { return x >= a && x <= b; }
};

/// Behaviour of a function beyond its last grid node.
///
/// limit_value continues the function as the constant `limit`, which must
/// equal the last node value (functions are continuous). exponential_decay
/// continues it as limit + (v - limit) * exp(-rate * (x - x_last)), where v
/// is the last node value.
struct TailSpec {
  enum class Kind { limit_value, exponential_decay };

  Kind kind = Kind::limit_value;
  double limit = 0.0;
  double rate = 0.0;

  static TailSpec constant(double limit) { return {Kind::limit_value, limit, 0.0}; }
  static TailSpec exponential(double rate, double limit = 0.0) {
    return {Kind::exponential_decay, limit, rate};
  }

  bool is_exponential() const noexcept { return kind == Kind::exponential_decay; }
};

/// Continuous piecewise-linear function on a strictly increasing grid, with
/// an optional tail that extends it to [a, inf).
///
/// Immutable after construction. Node values are reproduced bit-exactly by
/// eval(); prefix integrals and suffix variations are cached so interval
/// integrals and tail variations are O(log n).
class GridFn {
 public:
  GridFn(std::vector<double> grid, std::vector<double> values,
         std::optional<TailSpec> tail = std::nullopt);

  /// Constant function c on [a, inf).
  static GridFn constant(double c, double a = 0.0);

  /// Samples `fn` at the given nodes.
  template <typename F>
  static GridFn sample(std::span<const double> grid, F&& fn,
                       std::optional<TailSpec> tail = std::nullopt) {
    std::vector<double> values;
    values.reserve(grid.size());
    for (double x : grid) values.push_back(fn(x));
    if (tail && tail->kind == TailSpec::Kind::limit_value && !values.empty())
      tail->limit = values.back();
    return GridFn(std::vector<double>(grid.begin(), grid.end()), std::move(values), tail);
  }

  double eval(double x) const;
  double operator()(double x) const { return eval(x); }

  Interval interval() const noexcept { return {grid_.front(), right_end()}; }
  double a() const noexcept { return grid_.front(); }
  double right_end() const noexcept { return tail_ ? kInf : grid_.back(); }
  bool infinite() const noexcept { return tail_.has_value(); }

  std::span<const double> grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::optional<TailSpec>& tail() const noexcept { return tail_; }
  std::size_t size() const noexcept { return grid_.size(); }
  double last_node() const noexcept { return grid_.back(); }
  double last_value() const noexcept { return values_.back(); }

  /// f(b) for finite intervals, the declared limit otherwise.
  double right_value() const noexcept;

  /// Index i of the segment [grid[i], grid[i+1]] holding x; size()-1 in the tail.
  std::size_t segment_index(double x) const;

  double total_variation() const noexcept;

  /// Variation of f over [x, b) (or [x, inf)).
  double variation_from(double x) const;

  /// sup |f| over [x, b).
  double sup_abs_from(double x) const;
  double sup_abs() const { return sup_abs_from(a()); }

  /// Exact integral of the representation over [lo, hi]; hi may be kInf.
  double integral(double lo, double hi) const;

  /// Same function with extra nodes inserted (values by interpolation).
  GridFn refined(std::span<const double> extra_nodes) const;

 private:
  double tail_eval(double x) const noexcept;
  double tail_integral(double lo, double hi) const;
  double cumulative(double x) const;

  std::vector<double> grid_;
  std::vector<double> values_;
  std::optional<TailSpec> tail_;
  std::vector<double> prefix_integral_;
  std::vector<double> suffix_variation_;
  std::vector<double> suffix_sup_;
};

enum class Direction { increasing, non_decreasing, decreasing, non_increasing };

std::string_view to_string(Direction d) noexcept;
std::optional<Direction> parse_direction(std::string_view s) noexcept;

struct MonotoneClass {
  std::optional<Direction> direction;  // strongest consistent direction
  bool constant = false;               // both non-decreasing and non-increasing
};

/// Strongest monotonicity of the node values (and of an exponential tail step).
/// Strict directions require every step > tol; non-strict allow steps >= -tol.
MonotoneClass classify_monotone(const GridFn& f, double tol = kMonotoneTol);

/// True if a function of class `c` satisfies the declared direction.
bool satisfies(const MonotoneClass& c, Direction declared) noexcept;

/// Non-negative bounded GridFn with a declared monotonicity direction.
class MonotoneFn {
 public:
  MonotoneFn(GridFn base, Direction direction);

  const GridFn& base() const noexcept { return base_; }
  Direction direction() const noexcept { return direction_; }
  double bound() const noexcept { return bound_; }
  double operator()(double x) const { return base_.eval(x); }

  bool non_decreasing() const noexcept {
    return direction_ == Direction::increasing || direction_ == Direction::non_decreasing;
  }
  bool strict() const noexcept {
    return direction_ == Direction::increasing || direction_ == Direction::decreasing;
  }

 private:
  GridFn base_;
  Direction direction_;
  double bound_;
};

/// Continuous function of bounded variation with a known right value.
class BVFn {
 public:
  explicit BVFn(GridFn base);

  const GridFn& base() const noexcept { return base_; }
  double right_value() const noexcept { return right_value_; }
  double total_variation() const noexcept { return base_.total_variation(); }
  bool in_set_A(double eps = kSetATol) const noexcept;
  double operator()(double x) const { return base_.eval(x); }

 private:
  GridFn base_;
  double right_value_;
};

/// Sorted union of two grids, clipped to [lo, hi].
std::vector<double> merge_grids(std::span<const double> lhs, std::span<const double> rhs,
                                double lo, double hi);

}  // namespace bvpop
