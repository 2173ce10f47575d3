#pragma once

#include <optional>

#include "bvpop/grid_fn.hpp"

namespace bvpop {

struct QuadratureConfig {
  /// Nodes per source segment (endpoints included) when building derived
  /// integrators: powers h^p, g^p and survival curves exp(-int f).
  int panel_points = 8;
  /// Truncation criterion for improper integrals.
  double tail_tol = 1e-10;
  /// Hard cap for the truncation search.
  double max_domain = 1e6;
  /// Largest cumulative-hazard increment between nodes of a derived survival curve.
  double max_hazard_step = 1e-3;

  void validate() const;
};

struct IntegralResult {
  double value = 0.0;
  std::optional<double> truncation_point;  // present iff the interval was infinite
  double est_tail_error = 0.0;
};

/// int_lo^hi f dk over a finite range, exact for the representations of f and k.
///
/// Segments come from the merged grids. On each one k is either linear
/// (density = slope) or in its exponential tail, and f is linear or in its
/// tail; every pairing has a closed form.
double integrate_against(const GridFn& f, const GridFn& k, double lo, double hi);

/// int_a^b h d[-g] on a finite interval.
IntegralResult stieltjes_integral(const GridFn& h, const BVFn& g, Interval iv,
                                  const QuadratureConfig& cfg = {});

/// int_a^inf h d[-g] with truncation at the first point b* where
/// sup|h| * Var_[b*,inf)(g) < tail_tol.
/// Throws TruncationError when b* would exceed cfg.max_domain.
IntegralResult improper_stieltjes(const GridFn& h, const BVFn& g, double a,
                                  const QuadratureConfig& cfg = {});

/// Dispatches on iv.infinite().
IntegralResult integrate(const GridFn& h, const BVFn& g, Interval iv,
                         const QuadratureConfig& cfg = {});

struct ByPartsCheck {
  double lhs = 0.0;       // int h d[-g]
  double rhs = 0.0;       // h(a)g(a) - h(b)g(b) + int g dh
  double residual = 0.0;  // |lhs - rhs|
  bool improper = false;
};

ByPartsCheck integrate_by_parts_residual(const MonotoneFn& h, const BVFn& g, Interval iv,
                                         const QuadratureConfig& cfg = {});

/// Value of a functional computed directly and through integration by parts.
struct FunctionalValue {
  double value = 0.0;
  double by_parts = 0.0;
  double discrepancy = 0.0;
};

/// F(G) = int H d[-G] for non-decreasing H >= 0 and G in A.
FunctionalValue functional_F(const MonotoneFn& H, const BVFn& G, const QuadratureConfig& cfg = {});

/// F0(G) = int H dG for non-increasing H >= 0 and G in A.
FunctionalValue functional_F0(const MonotoneFn& H, const BVFn& G,
                              const QuadratureConfig& cfg = {});

/// Survival curve g(x) = exp(-int_a^x f) as a piecewise-linear integrator.
///
/// Each segment of f is split into at least panel_points - 1 pieces and
/// further until the cumulative hazard grows by at most max_hazard_step per
/// piece. `divergent` reports whether int f = inf, read off f's tail limit.
struct SurvivalCurve {
  BVFn g;
  bool divergent;
};
SurvivalCurve survival_integrator(const GridFn& f, const QuadratureConfig& cfg = {});

struct IResult {
  double value = 0.0;
  bool hypothesis_warning = false;  // int f < inf, so g does not vanish at infinity
  IntegralResult integral;
};

/// I(f) = int_0^inf h(x) f(x) exp(-int_0^x f) dx = int h d[-exp(-int f)].
IResult functional_I(const MonotoneFn& h, const GridFn& f, const QuadratureConfig& cfg = {});

}  // namespace bvpop
