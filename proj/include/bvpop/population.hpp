#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bvpop/errors.hpp"
#include "bvpop/grid_fn.hpp"
#include "bvpop/monotone_props.hpp"
#include "bvpop/stieltjes.hpp"

namespace bvpop {

/// Non-negative integrable population density on [0, inf).
class Density {
 public:
  explicit Density(GridFn u);

  /// u = 0.
  static Density zero();

  const GridFn& fn() const noexcept { return u_; }
  double total() const noexcept { return total_; }
  double operator()(double x) const { return u_.eval(x); }
  bool is_zero() const noexcept;

 private:
  GridFn u_;
  double total_;
};

/// Weight w(x, y) >= 0 of the environment functional E(x; u) = int w(x, y) u(y) dy.
struct EnvironmentKernel {
  enum class Kind { total, window, above, custom };

  Kind kind = Kind::total;
  double width = 0.0;  // window: w = 1 on [x, x + width]
  // custom: bilinear table w(x_nodes[i], y_nodes[j]) = weights[i * y_nodes.size() + j],
  // clamped in x and zero outside [y_nodes.front(), y_nodes.back()]
  std::vector<double> x_nodes;
  std::vector<double> y_nodes;
  std::vector<double> weights;

  static EnvironmentKernel total() { return {}; }
  static EnvironmentKernel window(double width);
  static EnvironmentKernel above();
  static EnvironmentKernel custom(std::vector<double> x_nodes, std::vector<double> y_nodes,
                                  std::vector<double> weights);

  void validate() const;
  double weight(double x, double y) const;
};

std::string_view to_string(EnvironmentKernel::Kind k) noexcept;

double environment_E(const Density& u, const EnvironmentKernel& kernel, double x);

/// Response phi(E) of a vital rate to the environment; phi(0) = 1.
enum class Response { none, exp_decay, hill, linear_up };

std::string_view to_string(Response r) noexcept;
std::optional<Response> parse_response(std::string_view s) noexcept;

struct Modulation {
  Response response = Response::none;
  double c = 0.0;
  EnvironmentKernel kernel;

  double phi(double E) const noexcept;
  bool active() const noexcept { return response != Response::none && c != 0.0; }
};

/// rate(x, u) = base(x) * phi(E(x; u)).
struct RateSpec {
  GridFn base;
  Modulation modulation;

  RateSpec(GridFn base, Modulation modulation = {})
      : base(std::move(base)), modulation(std::move(modulation)) {}
};

struct VitalRates {
  RateSpec beta;    // fertility
  RateSpec mu;      // mortality
  RateSpec growth;  // growth coefficient g

  /// Throws InvalidArgument on negative fertility, mortality without a
  /// positive limit, non-positive growth, or malformed modulation.
  void validate() const;
};

/// Whether the construction guarantees that R(u) is non-increasing in u.
struct MonotoneMode {
  bool beta_non_increasing = false;
  bool mu_non_decreasing = false;
  bool growth_non_increasing = false;
  /// With modulated growth: mu > 0 and beta/mu non-decreasing in x at u = 0.
  bool profile_ok = false;

  bool all() const noexcept {
    return beta_non_increasing && mu_non_decreasing && growth_non_increasing && profile_ok;
  }
  std::string describe() const;
};

MonotoneMode monotone_mode(const VitalRates& rates);

struct PopulationConfig {
  QuadratureConfig quad;
  /// Largest x-step of the model grid.
  double max_step = 0.05;
  /// Largest zero-density hazard increment (mu/g) * dx per model grid step.
  double hazard_step = 0.0025;
  /// The model grid extends until the zero-density cumulative hazard reaches this.
  double hazard_span = 50.0;

  void validate() const;
};

/// Nodes at which Pi, R and the equilibrium are evaluated. Depends only on the
/// rates at u = 0 and on cfg: steps shrink where mu/g is large and every base
/// node of the rates is included.
std::vector<double> model_grid(const VitalRates& rates, const PopulationConfig& cfg);

/// Rates, hazard mu/g and survival along a model grid for a fixed density.
///
/// survival solves S' = -(mu/g) S with the trapezoidal step
/// S[i+1] = S[i] (1 - dx f[i]/2) / (1 + dx f[i+1]/2), which keeps the discrete
/// net reproduction rate exactly consistent with the trapezoidal birth integral.
struct SurvivalProfile {
  std::vector<double> x;
  std::vector<double> beta;
  std::vector<double> mu;
  std::vector<double> growth;
  std::vector<double> hazard;    // mu / g
  std::vector<double> survival;  // exp(-int mu/g)
  std::vector<double> Pi;        // survival / g
};

SurvivalProfile survival_profile(const VitalRates& rates, const Density& u,
                                 std::span<const double> grid);

/// Pi(x, u) = exp(-int_0^x mu/g) / g(x, u).
double survival_Pi(double x, const Density& u, const VitalRates& rates,
                   const PopulationConfig& cfg = {});

/// R(u) = int_0^inf beta(x, u) Pi(x, u) dx, truncated where
/// sup(beta/mu) * survival < tail_tol.
IntegralResult net_reproduction_R(const Density& u, const VitalRates& rates,
                                  const PopulationConfig& cfg = {});

/// R(u) through int h d[-exp(-int f)] with h = beta/mu and f = mu/g.
/// Needs mu > 0 on the model grid.
double net_reproduction_R_stieltjes(const Density& u, const VitalRates& rates,
                                    const PopulationConfig& cfg = {});

/// G(u) = int beta(x, u) u(x) dx, trapezoid on the grid of u plus the tail.
double birth_functional_G(const Density& u, const VitalRates& rates);

/// || u - G(u) Pi(., u) ||_1 over the model grid and tail.
double stationary_residual(const Density& u, const VitalRates& rates,
                           const PopulationConfig& cfg = {});

struct SolverConfig {
  double tol_R = 1e-6;
  double tol_inner = 1e-8;
  double tol_fix = 1e-6;
  int max_inner = 500;
  double damping = 0.5;
  double bisection_tol = 1e-8;
  int max_outer = 200;

  void validate() const;
};

/// Inner fixed point u <- (1 - d) u + d B Pi(., u) did not settle.
class InnerIterationError : public NumericalError {
 public:
  InnerIterationError(const std::string& what, double birth_rate, double last_change, int iterations)
      : NumericalError(what), birth_rate_(birth_rate), last_change_(last_change),
        iterations_(iterations) {}

  double birth_rate() const noexcept { return birth_rate_; }
  double last_change() const noexcept { return last_change_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double birth_rate_;
  double last_change_;
  int iterations_;
};

struct EquilibriumResult {
  enum class Status { converged, no_crossing, not_converged };

  Status status = Status::no_crossing;
  double R_zero = 0.0;
  double B_star = 0.0;
  std::optional<Density> u_star;
  std::optional<SurvivalProfile> profile;  // rates and Pi at u_star
  double R_at_star = 0.0;
  double residual = 0.0;
  double G_at_star = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
  // R(u_B) - 1 at the bracket ends
  std::pair<double, double> bracket_values{0.0, 0.0};
};

std::string_view to_string(EquilibriumResult::Status s) noexcept;

/// Nontrivial equilibrium u* = B* Pi(., u*) with R(u*) = 1.
///
/// For each candidate B the density u_B = B Pi(., u_B) is found by damped
/// fixed-point iteration from u = 0; B is then bisected on R(u_B) - 1.
EquilibriumResult solve_equilibrium(const VitalRates& rates, const PopulationConfig& cfg,
                                    const SolverConfig& solver,
                                    std::pair<double, double> B_bracket);

struct RMonotoneCheck {
  double R1 = 0.0;
  double R2 = 0.0;
  double delta = 0.0;  // R(u2) - R(u1)
  bool ok = false;     // delta <= 1e-8
};

/// Compares R at ordered densities u1 <= u2. Throws PreconditionError when
/// the rates are not in monotone mode or the densities are not ordered.
RMonotoneCheck check_R_monotone(const VitalRates& rates, const Density& u1, const Density& u2,
                                const PopulationConfig& cfg = {});

struct ThresholdReport {
  enum class Conclusion { expected, excluded, indeterminate };

  double R_zero = 0.0;
  MonotoneMode mode;
  Conclusion conclusion = Conclusion::indeterminate;
  std::string message;
};

std::string_view to_string(ThresholdReport::Conclusion c) noexcept;

ThresholdReport threshold_report(const VitalRates& rates, const PopulationConfig& cfg = {});

/// Random monotone-mode rates with ordered densities u1 <= u2.
struct MonotoneRatesInstance {
  VitalRates rates;
  Density u1;
  Density u2;
};

MonotoneRatesInstance gen_monotone_instance(Rng& rng);

/// One row per instance (property "R_monotone", margin = R(u1) - R(u2)).
/// Instance i uses Rng::for_instance(seed, i).
SuiteReport run_R_monotone_suite(std::size_t n_instances, std::uint64_t seed,
                                 const PopulationConfig& cfg = {}, unsigned threads = 1);

}  // namespace bvpop
