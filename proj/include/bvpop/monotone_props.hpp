#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bvpop/grid_fn.hpp"
#include "bvpop/stieltjes.hpp"

namespace bvpop {

/// Deterministic uniform draws on top of mt19937_64. The standard
/// distributions are implementation-defined, these are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Stream for instance `index` of a run seeded with `seed`.
  static Rng for_instance(std::uint64_t seed, std::uint64_t index);

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

enum class FamilyKind { exp_decay, rational_decay, piecewise_random };

std::string_view to_string(FamilyKind k) noexcept;

/// Sampler for integrators G in A and integrands H.
///
/// exp_decay: G = A exp(-lambda x) on [0, inf).
/// rational_decay: G = A (1 + x)^-q on [0, X] with a matched exponential tail.
/// piecewise_random: random decreasing piecewise-linear G on [0, b], G(b) = 0.
/// All family parameters are drawn from `seed`.
struct InstanceFamily {
  FamilyKind kind = FamilyKind::exp_decay;
  std::uint64_t seed = 0;
  /// When set, the bump G2 - G1 also vanishes at the left endpoint.
  bool anchored = false;
};

/// Decreasing G in A drawn from the family.
BVFn gen_integrator(FamilyKind kind, Rng& rng);

/// G1 < G2 on the open interval, both in A. G2 = G1 + positive bump.
std::pair<BVFn, BVFn> gen_pair_A(const InstanceFamily& family);

enum class IntegrandKind { saturating, rational_ramp, staircase };

/// Strictly increasing, bounded, non-negative H on the domain of `like`.
MonotoneFn gen_increasing(IntegrandKind kind, Rng& rng, const GridFn& like);

/// Strictly decreasing, bounded, positive H on the domain of `like`.
MonotoneFn gen_decreasing(Rng& rng, const GridFn& like);

/// Constant H = c on the domain of `like`.
MonotoneFn constant_on(double c, const GridFn& like);

struct Prop1Check {
  double F1 = 0.0;
  double F2 = 0.0;
  double delta = 0.0;  // F(G2) - F(G1)
  bool strict_ok = false;
  bool nonstrict_ok = false;
};

/// Throws PreconditionError unless G1 <= G2 (sampled on nodes and tail points).
void require_ordered(const GridFn& lower, const GridFn& upper, std::string_view what);

/// Compares F(G1) and F(G2); non-strict passes when delta >= -1e-10.
Prop1Check check_prop1(const MonotoneFn& H, const BVFn& G1, const BVFn& G2,
                       const QuadratureConfig& cfg = {});

/// Same comparison for F0 with a non-increasing H.
Prop1Check check_cor1(const MonotoneFn& H, const BVFn& G1, const BVFn& G2,
                      const QuadratureConfig& cfg = {});

/// Power-inequality report for int h d[-g] against m = int h^p d[-g^p].
///
/// The inequality is asserted with exponent 1/p (m^(1/p)); the variant with
/// exponent p is evaluated and reported alongside. For p <= 1 the expected
/// direction is lhs <= rhs, for p >= 1 it is lhs >= rhs.
struct HMReport {
  double p = 1.0;
  double lhs = 0.0;
  double m = 0.0;
  double rhs_inv_p = 0.0;  // m^(1/p)
  double rhs_pow_p = 0.0;  // m^p
  double margin_inv_p = 0.0;
  double margin_pow_p = 0.0;
  bool holds_inv_p = false;
  bool holds_pow_p = false;
};

inline constexpr double kHMSlack = 1e-8;

/// Nodewise power of a grid function; each segment is first split into
/// panel_points - 1 pieces. Exponential tails map to exponential tails.
GridFn power_transform(const GridFn& f, double p, int panel_points);

HMReport hm_evaluate(const MonotoneFn& h, const BVFn& g, double p,
                     const QuadratureConfig& cfg = {});

struct SuiteRow {
  std::uint64_t instance = 0;
  std::string property;
  double margin = 0.0;
  bool pass = false;
  bool asserted = true;  // reported-only rows never fail the suite
};

struct PropertySummary {
  std::string property;
  std::size_t count = 0;
  std::size_t passed = 0;
  double worst_margin = 0.0;
  bool asserted = true;
};

struct SuiteReport {
  std::uint64_t seed = 0;
  std::size_t n_instances = 0;
  std::vector<SuiteRow> rows;  // sorted by instance, then property order
  std::vector<PropertySummary> summary;
  bool failed = false;  // any asserted row failed
};

struct SuiteOptions {
  unsigned threads = 1;
  /// Test hook: evaluate F with the integrator's sign reversed.
  bool corrupt_integrator = false;
  std::vector<double> hm_exponents{0.25, 0.5, 0.75, 1.0, 2.0, 4.0};
};

/// Runs `run(i)` for every instance on up to `threads` threads and assembles
/// rows in instance order. An exception becomes a failing "error: ..." row.
SuiteReport collect_suite(std::size_t n_instances, std::uint64_t seed, unsigned threads,
                          const std::function<std::vector<SuiteRow>(std::uint64_t)>& run);

/// Randomized checks of by-parts identity, monotonicity of F, F0 and I, and
/// the power inequality. Instance i uses Rng::for_instance(seed, i), so the
/// report does not depend on the thread count.
SuiteReport run_property_suite(std::size_t n_instances, std::uint64_t seed,
                               const QuadratureConfig& cfg = {}, const SuiteOptions& opts = {});

/// CSV with header instance_id,property,margin,pass.
void write_suite_csv(const SuiteReport& report, std::ostream& out);

}  // namespace bvpop
