#include "bvpop/cli/schema.hpp"

#include <json.hpp>

#include "bvpop/cli/config.hpp"

namespace bvpop::cli {

using ojson = nlohmann::ordered_json;

namespace {

ojson number(const char* description) { return {{"type", "number"}, {"description", description}}; }

ojson positive(const char* description, double default_value) {
  return {{"type", "number"}, {"exclusiveMinimum", 0}, {"default", default_value}, {"description", description}};
}

ojson integer(const char* description, long long minimum, long long default_value) {
  return {{"type", "integer"}, {"minimum", minimum}, {"default", default_value}, {"description", description}};
}

ojson closed(ojson properties, std::vector<std::string> required) {
  return {{"type", "object"},
          {"properties", std::move(properties)},
          {"required", std::move(required)},
          {"additionalProperties", false}};
}

ojson ref(const char* name) { return {{"$ref", std::string("#/$defs/") + name}}; }

ojson defs() {
  const PopulationConfig pc;
  const SolverConfig sc;
  ojson d;
  d["tail"] = {
      {"oneOf",
       {closed({{"kind", {{"const", "limit_value"}}},
                {"limit", number("must equal the last value when given")}},
               {"kind"}),
        closed({{"kind", {{"const", "exponential_decay"}}},
                {"rate", {{"type", "number"}, {"exclusiveMinimum", 0}}},
                {"limit", number("value approached as x -> inf")}},
               {"kind", "rate", "limit"})}}};
  d["function"] = {
      {"description", "continuous piecewise-linear function; a tail extends it to [a, inf)"},
      {"oneOf",
       {closed({{"grid", {{"type", "array"}, {"items", {{"type", "number"}}}, {"minItems", 2}}},
                {"values", {{"type", "array"}, {"items", {{"type", "number"}}}, {"minItems", 2}}},
                {"tail", ref("tail")}},
               {"grid", "values"}),
        closed({{"constant", number("value on [a, inf)")}, {"a", number("left endpoint, default 0")}},
               {"constant"}),
        closed({{"file", {{"type", "string"}, {"description", "two-column x,value CSV, relative to the config"}}},
                {"tail", ref("tail")}},
               {"file"})}}};
  d["interval"] = closed({{"a", number("left endpoint")},
                          {"b", {{"oneOf", {{{"type", "number"}}, {{"enum", {"inf", "infinity"}}}}}}}},
                         {"a", "b"});
  d["kernel"] = {
      {"oneOf",
       {closed({{"kind", {{"const", "total"}}}}, {"kind"}),
        closed({{"kind", {{"const", "above"}}}}, {"kind"}),
        closed({{"kind", {{"const", "window"}}}, {"width", {{"type", "number"}, {"exclusiveMinimum", 0}}}},
               {"kind", "width"}),
        closed({{"kind", {{"const", "custom"}}},
                {"x_nodes", {{"type", "array"}, {"items", {{"type", "number"}}}}},
                {"y_nodes", {{"type", "array"}, {"items", {{"type", "number"}}}}},
                {"weights", {{"type", "array"}, {"items", {{"type", "number"}, {"minimum", 0}}},
                             {"description", "row-major, x_nodes.size() * y_nodes.size() entries"}}}},
               {"kind", "x_nodes", "y_nodes", "weights"})}}};
  d["modulation"] = {
      {"oneOf",
       {{{"const", "none"}},
        closed({{"response", {{"enum", {"none", "exp_decay", "hill", "linear_up"}}}},
                {"c", {{"type", "number"}, {"minimum", 0}}},
                {"kernel", ref("kernel")}},
               {"response", "c", "kernel"})}}};
  d["rate"] = closed({{"base", ref("function")}, {"modulation", ref("modulation")}}, {"base", "modulation"});
  d["rates"] = closed({{"beta", ref("rate")}, {"mu", ref("rate")}, {"growth", ref("rate")}},
                      {"beta", "mu", "growth"});
  d["cfg"] = closed({{"panel_points", integer("nodes per segment for derived functions", 2, pc.quad.panel_points)},
                     {"tail_tol", positive("truncation tolerance for improper integrals", pc.quad.tail_tol)},
                     {"max_domain", positive("cap for the truncation search", pc.quad.max_domain)},
                     {"max_hazard_step", positive("hazard increment per node of survival curves", pc.quad.max_hazard_step)},
                     {"max_step", positive("largest model grid step", pc.max_step)},
                     {"hazard_step", positive("hazard increment per model grid step, < 1", pc.hazard_step)},
                     {"hazard_span", positive("cumulative hazard covered by the model grid", pc.hazard_span)}},
                    {});
  d["solver"] = closed({{"tol_R", positive("|R(u*) - 1| tolerance", sc.tol_R)},
                        {"tol_inner", positive("L1 change ending the inner iteration", sc.tol_inner)},
                        {"tol_fix", positive("stationary residual tolerance", sc.tol_fix)},
                        {"max_inner", integer("inner iteration cap", 1, sc.max_inner)},
                        {"damping", positive("inner damping factor, <= 1", sc.damping)},
                        {"bisection_tol", positive("bracket width ending the bisection", sc.bisection_tol)},
                        {"max_outer", integer("bisection step cap", 1, sc.max_outer)},
                        {"bracket", {{"type", "array"}, {"items", {{"type", "number"}}}, {"minItems", 2},
                                     {"maxItems", 2}, {"default", {0.0, 100.0}}}}},
                       {});
  return d;
}

ojson kind_branch(ScenarioKind k) {
  ojson props{{"kind", {{"const", std::string(to_string(k))}}}};
  std::vector<std::string> req{"schema", "kind"};
  switch (k) {
    case ScenarioKind::integrate:
      props["h"] = ref("function");
      props["g"] = ref("function");
      props["interval"] = ref("interval");
      req.insert(req.end(), {"h", "g", "interval"});
      break;
    case ScenarioKind::ibp_check:
      props["h"] = ref("function");
      props["h_direction"] = {{"enum", {"increasing", "non_decreasing", "decreasing", "non_increasing"}}};
      props["g"] = ref("function");
      props["interval"] = ref("interval");
      req.insert(req.end(), {"h", "h_direction", "g", "interval"});
      break;
    case ScenarioKind::prop_suite:
      props["suite"] = {{"enum", {"properties", "R_monotone"}}, {"default", "properties"}};
      props["n_instances"] = {{"type", "integer"}, {"minimum", 1}};
      props["threads"] = integer("worker threads; output does not depend on it", 1, 1);
      props["hm_exponents"] = {{"type", "array"}, {"items", {{"type", "number"}, {"exclusiveMinimum", 0}}},
                               {"default", {0.25, 0.5, 0.75, 1.0, 2.0, 4.0}}};
      props["test_hooks"] = closed({{"corrupt_integrator", {{"type", "boolean"}, {"default", false}}}}, {});
      req.push_back("n_instances");
      break;
    case ScenarioKind::hm_check:
      props["h"] = ref("function");
      props["g"] = ref("function");
      props["exponents"] = {{"type", "array"}, {"items", {{"type", "number"}, {"exclusiveMinimum", 0}}},
                            {"minItems", 1}};
      req.insert(req.end(), {"h", "g", "exponents"});
      break;
    case ScenarioKind::reproduction:
      props["rates"] = ref("rates");
      props["density"] = {{"oneOf", {{{"const", "zero"}}, ref("function")}}};
      req.insert(req.end(), {"rates", "density"});
      break;
    case ScenarioKind::equilibrium:
      props["rates"] = ref("rates");
      props["solver"] = ref("solver");
      req.push_back("rates");
      break;
    case ScenarioKind::threshold:
      props["rates"] = ref("rates");
      req.push_back("rates");
      break;
  }
  return {{"properties", props}, {"required", req}};
}

}  // namespace

std::string config_schema() {
  ojson kinds = ojson::array();
  for (ScenarioKind k : all_kinds()) kinds.push_back(std::string(to_string(k)));
  ojson branches = ojson::array();
  for (ScenarioKind k : all_kinds()) branches.push_back(kind_branch(k));

  ojson s{{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"title", "bvpop scenario config"},
          {"type", "object"},
          {"properties",
           {{"schema", {{"const", 1}}},
            {"kind", {{"enum", kinds}}},
            {"seed", integer("random seed", 0, 0)},
            {"output_path", {{"type", "string"}, {"default", "."}, {"description", "output directory"}}},
            {"cfg", ref("cfg")}}},
          {"required", {"schema", "kind"}},
          {"oneOf", branches},
          {"$defs", defs()}};
  return s.dump(2) + "\n";
}

}  // namespace bvpop::cli
