#include "bvpop/cli/scenario.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "bvpop/format.hpp"
#include "bvpop/monotone_props.hpp"

namespace bvpop::cli {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

ojson real_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

ojson echo_cfg(const PopulationConfig& c) {
  return ojson{{"panel_points", c.quad.panel_points}, {"tail_tol", c.quad.tail_tol},
               {"max_domain", c.quad.max_domain},     {"max_hazard_step", c.quad.max_hazard_step},
               {"max_step", c.max_step},              {"hazard_step", c.hazard_step},
               {"hazard_span", c.hazard_span}};
}

ojson echo_solver(const SolverConfig& s, std::pair<double, double> bracket) {
  return ojson{{"tol_R", s.tol_R},
               {"tol_inner", s.tol_inner},
               {"tol_fix", s.tol_fix},
               {"max_inner", s.max_inner},
               {"damping", s.damping},
               {"bisection_tol", s.bisection_tol},
               {"max_outer", s.max_outer},
               {"bracket", {bracket.first, bracket.second}}};
}

ojson echo_mode(const MonotoneMode& m) {
  return ojson{{"beta_non_increasing", m.beta_non_increasing},
               {"mu_non_decreasing", m.mu_non_decreasing},
               {"growth_non_increasing", m.growth_non_increasing},
               {"profile_ok", m.profile_ok},
               {"all", m.all()}};
}

// Two-column CSV of named quantities.
class QuantityTable {
 public:
  void add(const std::string& name, double v) { rows_ += name + "," + format_real(v) + "\n"; }
  void add(const std::string& name, const std::string& v) { rows_ += name + "," + v + "\n"; }
  std::string str() const { return "quantity,value\n" + rows_; }

 private:
  std::string rows_;
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
  if (!out) throw Error("write failed for " + p.string());
}

struct Output {
  std::string csv;
  ojson summary;
  int exit_code = kExitOk;
  std::string headline;
};

Output run_integrate(const IntegrateSpec& s, const ScenarioConfig& c) {
  const IntegralResult r = integrate(s.h, BVFn(s.g), s.interval, c.cfg.quad);
  Output o;
  QuantityTable t;
  t.add("value", r.value);
  if (r.truncation_point) t.add("truncation_point", *r.truncation_point);
  t.add("est_tail_error", r.est_tail_error);
  o.csv = t.str();
  o.summary = {{"value", r.value},
               {"truncation_point", real_or_null(r.truncation_point)},
               {"est_tail_error", r.est_tail_error}};
  o.headline = "integral = " + format_real(r.value);
  return o;
}

Output run_ibp(const IbpSpec& s, const ScenarioConfig& c) {
  const ByPartsCheck r =
      integrate_by_parts_residual(MonotoneFn(s.h, s.h_direction), BVFn(s.g), s.interval, c.cfg.quad);
  const double threshold = r.improper ? 10.0 * c.cfg.quad.tail_tol : 1e-7;
  const bool pass = r.residual < threshold;
  Output o;
  QuantityTable t;
  t.add("lhs", r.lhs);
  t.add("rhs", r.rhs);
  t.add("residual", r.residual);
  t.add("threshold", threshold);
  t.add("pass", pass ? "true" : "false");
  o.csv = t.str();
  o.summary = {{"lhs", r.lhs},         {"rhs", r.rhs},         {"residual", r.residual},
               {"threshold", threshold}, {"improper", r.improper}, {"pass", pass}};
  o.exit_code = pass ? kExitOk : kExitPropertyFailure;
  o.headline = "by-parts residual = " + format_real(r.residual) + (pass ? " (pass)" : " (FAIL)");
  return o;
}

Output run_suite(const PropSuiteSpec& s, const ScenarioConfig& c) {
  SuiteReport rep;
  if (s.suite == PropSuiteSpec::Suite::properties) {
    SuiteOptions opts;
    opts.threads = s.threads;
    opts.corrupt_integrator = s.corrupt_integrator;
    opts.hm_exponents = s.hm_exponents;
    rep = run_property_suite(s.n_instances, c.seed, c.cfg.quad, opts);
  } else {
    rep = run_R_monotone_suite(s.n_instances, c.seed, c.cfg, s.threads);
  }
  Output o;
  std::ostringstream csv;
  write_suite_csv(rep, csv);
  o.csv = csv.str();
  ojson props = ojson::array();
  for (const PropertySummary& p : rep.summary)
    props.push_back({{"property", p.property},
                     {"count", p.count},
                     {"passed", p.passed},
                     {"worst_margin", p.worst_margin},
                     {"asserted", p.asserted}});
  o.summary = {{"suite", s.suite == PropSuiteSpec::Suite::properties ? "properties" : "R_monotone"},
               {"n_instances", rep.n_instances},
               {"threads", s.threads},
               {"corrupt_integrator", s.corrupt_integrator},
               {"failed", rep.failed},
               {"properties", props}};
  if (s.suite == PropSuiteSpec::Suite::properties) o.summary["hm_exponents"] = s.hm_exponents;
  o.exit_code = rep.failed ? kExitPropertyFailure : kExitOk;
  std::size_t failures = 0;
  for (const SuiteRow& r : rep.rows)
    if (r.asserted && !r.pass) ++failures;
  o.headline = std::to_string(rep.rows.size()) + " checks, " + std::to_string(failures) + " asserted failures";
  return o;
}

Output run_hm(const HmSpec& s, const ScenarioConfig& c) {
  const MonotoneFn h(s.h, Direction::non_decreasing);
  const BVFn g(s.g);
  Output o;
  std::string csv = "p,lhs,m,rhs_inv_p,rhs_pow_p,margin_inv_p,margin_pow_p,holds_inv_p,holds_pow_p\n";
  ojson rows = ojson::array();
  bool all = true;
  for (double p : s.exponents) {
    const HMReport r = hm_evaluate(h, g, p, c.cfg.quad);
    all = all && r.holds_inv_p;
    csv += format_real(r.p) + "," + format_real(r.lhs) + "," + format_real(r.m) + "," +
           format_real(r.rhs_inv_p) + "," + format_real(r.rhs_pow_p) + "," + format_real(r.margin_inv_p) +
           "," + format_real(r.margin_pow_p) + "," + (r.holds_inv_p ? "true" : "false") + "," +
           (r.holds_pow_p ? "true" : "false") + "\n";
    rows.push_back({{"p", r.p},
                    {"lhs", r.lhs},
                    {"m", r.m},
                    {"rhs_inv_p", r.rhs_inv_p},
                    {"rhs_pow_p", r.rhs_pow_p},
                    {"margin_inv_p", r.margin_inv_p},
                    {"margin_pow_p", r.margin_pow_p},
                    {"holds_inv_p", r.holds_inv_p},
                    {"holds_pow_p", r.holds_pow_p}});
  }
  o.csv = csv;
  o.summary = {{"reports", rows}, {"all_hold_inv_p", all}, {"slack", kHMSlack}};
  o.exit_code = all ? kExitOk : kExitPropertyFailure;
  o.headline = all ? "power inequality holds for all exponents" : "power inequality FAILS for some exponent";
  return o;
}

std::string profile_csv(const SurvivalProfile& p, const Density* u) {
  std::string csv = u ? "x,u,Pi\n" : "x,beta,mu,growth,Pi\n";
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    csv += format_real(p.x[i]);
    if (u) {
      csv += "," + format_real((*u)(p.x[i]));
    } else {
      csv += "," + format_real(p.beta[i]) + "," + format_real(p.mu[i]) + "," + format_real(p.growth[i]);
    }
    csv += "," + format_real(p.Pi[i]) + "\n";
  }
  return csv;
}

Output run_reproduction(const ReproductionSpec& s, const ScenarioConfig& c) {
  const IntegralResult R = net_reproduction_R(s.density, s.rates, c.cfg);
  ojson R_st = nullptr;
  std::string R_st_note;
  try {
    R_st = net_reproduction_R_stieltjes(s.density, s.rates, c.cfg);
  } catch (const PreconditionError& e) {
    R_st_note = e.what();
  }
  const double G = birth_functional_G(s.density, s.rates);
  const double residual = stationary_residual(s.density, s.rates, c.cfg);
  const std::vector<double> grid = model_grid(s.rates, c.cfg);
  const SurvivalProfile prof = survival_profile(s.rates, s.density, grid);

  Output o;
  o.csv = profile_csv(prof, nullptr);
  o.summary = {{"R", R.value},
               {"truncation_point", real_or_null(R.truncation_point)},
               {"est_tail_error", R.est_tail_error},
               {"R_stieltjes", R_st},
               {"density_total", s.density.total()},
               {"G", G},
               {"stationary_residual", residual},
               {"grid_nodes", grid.size()},
               {"monotone_mode", echo_mode(monotone_mode(s.rates))}};
  if (!R_st_note.empty()) o.summary["R_stieltjes_note"] = R_st_note;
  o.headline = "R = " + format_real(R.value);
  return o;
}

Output run_equilibrium(const EquilibriumSpec& s, const ScenarioConfig& c) {
  const EquilibriumResult r = solve_equilibrium(s.rates, c.cfg, c.solver, c.bracket);
  Output o;
  if (r.u_star && r.profile) o.csv = profile_csv(*r.profile, &*r.u_star);
  else o.csv = "x,u,Pi\n";
  o.summary = {{"status", std::string(to_string(r.status))},
               {"R_zero", r.R_zero},
               {"bracket_values", {r.bracket_values.first, r.bracket_values.second}}};
  if (r.status != EquilibriumResult::Status::no_crossing) {
    o.summary["B_star"] = r.B_star;
    o.summary["P_star"] = r.u_star->total();
    o.summary["R_at_star"] = r.R_at_star;
    o.summary["G_at_star"] = r.G_at_star;
    o.summary["residual"] = r.residual;
  }
  o.summary["iterations"] = {{"outer", r.outer_iterations}, {"inner", r.inner_iterations}};
  o.summary["converged"] = r.converged;
  o.summary["solver"] = echo_solver(c.solver, c.bracket);
  switch (r.status) {
    case EquilibriumResult::Status::converged:
      o.headline = "equilibrium B* = " + format_real(r.B_star);
      break;
    case EquilibriumResult::Status::no_crossing:
      o.headline = "no nontrivial equilibrium in bracket (R(0) = " + format_real(r.R_zero) + ")";
      break;
    case EquilibriumResult::Status::not_converged:
      o.headline = "equilibrium solver did not meet tolerances";
      o.exit_code = kExitError;
      break;
  }
  return o;
}

Output run_threshold(const ThresholdSpec& s, const ScenarioConfig& c) {
  const ThresholdReport r = threshold_report(s.rates, c.cfg);
  Output o;
  QuantityTable t;
  t.add("R_zero", r.R_zero);
  t.add("conclusion", std::string(to_string(r.conclusion)));
  t.add("monotone_mode", r.mode.all() ? "true" : "false");
  o.csv = t.str();
  o.summary = {{"R_zero", r.R_zero},
               {"conclusion", std::string(to_string(r.conclusion))},
               {"message", r.message},
               {"monotone_mode", echo_mode(r.mode)}};
  o.headline = r.message;
  return o;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& config) {
  Output o = std::visit(
      [&](const auto& spec) -> Output {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, std::monostate>) throw InvalidArgument("scenario has no content");
        else if constexpr (std::is_same_v<T, IntegrateSpec>) return run_integrate(spec, config);
        else if constexpr (std::is_same_v<T, IbpSpec>) return run_ibp(spec, config);
        else if constexpr (std::is_same_v<T, PropSuiteSpec>) return run_suite(spec, config);
        else if constexpr (std::is_same_v<T, HmSpec>) return run_hm(spec, config);
        else if constexpr (std::is_same_v<T, ReproductionSpec>) return run_reproduction(spec, config);
        else if constexpr (std::is_same_v<T, EquilibriumSpec>) return run_equilibrium(spec, config);
        else return run_threshold(spec, config);
      },
      config.spec);

  ojson summary{{"schema", 1},
                {"kind", std::string(to_string(config.kind))},
                {"seed", config.seed},
                {"exit_code", o.exit_code},
                {"result", o.summary},
                {"cfg", echo_cfg(config.cfg)}};

  fs::create_directories(config.output_path);
  RunResult res;
  res.exit_code = o.exit_code;
  res.csv_path = config.output_path / (config.name + ".csv");
  res.summary_path = config.output_path / (config.name + ".summary.json");
  res.headline = o.headline;
  write_file(res.csv_path, o.csv);
  write_file(res.summary_path, summary.dump(2) + "\n");
  return res;
}

std::string error_record(const std::exception& e) {
  ojson err{{"type", "error"}, {"message", e.what()}};
  if (auto ce = dynamic_cast<const ConfigError*>(&e)) {
    err["type"] = "config";
    ojson issues = ojson::array();
    for (const ConfigIssue& i : ce->issues()) issues.push_back({{"path", i.path}, {"message", i.message}});
    err["issues"] = issues;
  } else if (auto te = dynamic_cast<const TruncationError*>(&e)) {
    err["type"] = "truncation";
    err["best_estimate"] = real_or_null(te->best_estimate());
    err["error_bound"] = real_or_null(te->error_bound());
  } else if (auto ie = dynamic_cast<const InnerIterationError*>(&e)) {
    err["type"] = "inner_iteration";
    err["birth_rate"] = ie->birth_rate();
    err["last_change"] = real_or_null(ie->last_change());
    err["iterations"] = ie->iterations();
  } else if (dynamic_cast<const SingularityError*>(&e)) {
    err["type"] = "singularity";
  } else if (dynamic_cast<const NumericalError*>(&e)) {
    err["type"] = "numerical";
  } else if (dynamic_cast<const PreconditionError*>(&e)) {
    err["type"] = "precondition";
  } else if (dynamic_cast<const DomainError*>(&e)) {
    err["type"] = "domain";
  } else if (dynamic_cast<const InvalidArgument*>(&e)) {
    err["type"] = "invalid_argument";
  } else if (dynamic_cast<const fs::filesystem_error*>(&e)) {
    err["type"] = "io";
  }
  return ojson{{"error", err}}.dump();
}

int exit_code_for(const std::exception&) noexcept { return kExitError; }

}  // namespace bvpop::cli
