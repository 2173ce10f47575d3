#include "bvpop/cli/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace bvpop::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ScenarioKind k) noexcept {
  switch (k) {
    case ScenarioKind::integrate: return "integrate";
    case ScenarioKind::ibp_check: return "ibp_check";
    case ScenarioKind::prop_suite: return "prop_suite";
    case ScenarioKind::hm_check: return "hm_check";
    case ScenarioKind::reproduction: return "reproduction";
    case ScenarioKind::equilibrium: return "equilibrium";
    case ScenarioKind::threshold: return "threshold";
  }
  return "unknown";
}

const std::vector<ScenarioKind>& all_kinds() {
  static const std::vector<ScenarioKind> kinds{
      ScenarioKind::integrate,    ScenarioKind::ibp_check,   ScenarioKind::prop_suite,
      ScenarioKind::hm_check,     ScenarioKind::reproduction, ScenarioKind::equilibrium,
      ScenarioKind::threshold};
  return kinds;
}

std::optional<ScenarioKind> parse_kind(std::string_view s) noexcept {
  for (ScenarioKind k : all_kinds())
    if (to_string(k) == s) return k;
  return std::nullopt;
}

namespace {

std::string render_issues(const std::vector<ConfigIssue>& issues) {
  std::string s = "invalid config:";
  for (const ConfigIssue& i : issues) s += "\n  " + (i.path.empty() ? "<root>" : i.path) + ": " + i.message;
  return s;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(render_issues(issues)), issues_(std::move(issues)) {}

std::optional<std::string> suggest_key(std::string_view key, const std::vector<std::string>& candidates) {
  std::optional<std::string> best;
  std::size_t best_d = 3;
  for (const std::string& c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d && d < std::max<std::size_t>(c.size(), 2)) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

namespace {

const std::vector<std::string> kCommonKeys{"schema", "kind", "seed", "output_path", "cfg"};
const std::vector<std::string> kCfgKeys{"panel_points", "tail_tol",    "max_domain", "max_hazard_step",
                                        "max_step",     "hazard_step", "hazard_span"};
const std::vector<std::string> kSolverKeys{"tol_R",    "tol_inner", "tol_fix",       "max_inner",
                                           "damping",  "bisection_tol", "max_outer", "bracket"};

std::vector<std::string> kind_keys(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::integrate: return {"h", "g", "interval"};
    case ScenarioKind::ibp_check: return {"h", "h_direction", "g", "interval"};
    case ScenarioKind::prop_suite: return {"suite", "n_instances", "threads", "hm_exponents", "test_hooks"};
    case ScenarioKind::hm_check: return {"h", "g", "exponents"};
    case ScenarioKind::reproduction: return {"rates", "density"};
    case ScenarioKind::equilibrium: return {"rates", "solver"};
    case ScenarioKind::threshold: return {"rates"};
  }
  return {};
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::string type_name(const json& v) { return v.type_name(); }

// Collects issues while walking the document.
class Reader {
 public:
  explicit Reader(fs::path base_dir) : base_dir_(std::move(base_dir)) {}

  std::vector<ConfigIssue> issues;

  void fail(const std::string& path, std::string message) { issues.push_back({path, std::move(message)}); }

  bool object(const json& v, const std::string& path) {
    if (v.is_object()) return true;
    fail(path, "expected an object, got " + type_name(v));
    return false;
  }

  void keys(const json& obj, const std::string& path, const std::vector<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) != allowed.end()) continue;
      std::string msg = "unknown key \"" + it.key() + "\"";
      if (auto s = suggest_key(it.key(), allowed)) msg += " (did you mean \"" + *s + "\"?)";
      fail(join(path, it.key()), msg);
    }
  }

  const json* field(const json& obj, std::string_view key, const std::string& path, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(join(path, key), "missing required field");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> real(const json& v, const std::string& path, bool allow_inf = false) {
    if (v.is_number()) {
      const double d = v.get<double>();
      if (std::isfinite(d)) return d;
    }
    if (allow_inf && v.is_string() && (v == "inf" || v == "infinity")) return kInf;
    fail(path, allow_inf ? "expected a finite number or \"inf\"" : "expected a finite number");
    return std::nullopt;
  }

  std::optional<double> positive(const json& v, const std::string& path) {
    auto d = real(v, path);
    if (d && !(*d > 0.0)) {
      fail(path, "must be > 0, got " + v.dump());
      return std::nullopt;
    }
    return d;
  }

  std::optional<double> non_negative(const json& v, const std::string& path) {
    auto d = real(v, path);
    if (d && !(*d >= 0.0)) {
      fail(path, "must be >= 0, got " + v.dump());
      return std::nullopt;
    }
    return d;
  }

  std::optional<long long> integer(const json& v, const std::string& path, long long lo) {
    if (!v.is_number_integer()) {
      fail(path, "expected an integer");
      return std::nullopt;
    }
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<long long>::max())) {
      fail(path, "integer out of range");
      return std::nullopt;
    }
    const long long n = v.get<long long>();
    if (n < lo) {
      fail(path, "must be >= " + std::to_string(lo));
      return std::nullopt;
    }
    return n;
  }

  std::optional<std::string> string(const json& v, const std::string& path) {
    if (v.is_string()) return v.get<std::string>();
    fail(path, "expected a string");
    return std::nullopt;
  }

  std::optional<std::vector<double>> reals(const json& v, const std::string& path, std::size_t min_size) {
    if (!v.is_array()) {
      fail(path, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto d = real(v[i], index(path, i));
      if (d) out.push_back(*d);
      else ok = false;
    }
    if (ok && out.size() < min_size) {
      fail(path, "needs at least " + std::to_string(min_size) + " entries");
      return std::nullopt;
    }
    return ok ? std::optional(std::move(out)) : std::nullopt;
  }

  std::optional<TailSpec> tail(const json& v, const std::string& path) {
    if (!object(v, path)) return std::nullopt;
    auto kind_v = field(v, "kind", path, true);
    if (!kind_v) return std::nullopt;
    auto kind = string(*kind_v, join(path, "kind"));
    if (!kind) return std::nullopt;
    if (*kind == "limit_value") {
      keys(v, path, {"kind", "limit"});
      TailSpec t = TailSpec::constant(0.0);
      if (auto l = field(v, "limit", path, false)) {
        auto d = real(*l, join(path, "limit"));
        if (!d) return std::nullopt;
        t.limit = *d;
        declared_limit_ = d;
      } else {
        declared_limit_.reset();
      }
      return t;
    }
    if (*kind == "exponential_decay") {
      keys(v, path, {"kind", "rate", "limit"});
      auto r = field(v, "rate", path, true);
      auto l = field(v, "limit", path, true);
      std::optional<double> rate = r ? positive(*r, join(path, "rate")) : std::nullopt;
      std::optional<double> limit = l ? real(*l, join(path, "limit")) : std::nullopt;
      if (!rate || !limit) return std::nullopt;
      return TailSpec::exponential(*rate, *limit);
    }
    std::string msg = "unknown tail kind \"" + *kind + "\"";
    if (auto s = suggest_key(*kind, {"limit_value", "exponential_decay"})) msg += " (did you mean \"" + *s + "\"?)";
    fail(join(path, "kind"), msg);
    return std::nullopt;
  }

  std::optional<std::pair<std::vector<double>, std::vector<double>>> read_table(const std::string& file,
                                                                                const std::string& path) {
    fs::path p = file;
    if (p.is_relative()) p = base_dir_ / p;
    std::ifstream in(p);
    if (!in) {
      fail(path, "cannot open file " + p.string());
      return std::nullopt;
    }
    std::vector<double> xs, ys;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const std::size_t comma = line.find(',');
      auto parse = [](std::string_view s, double& out) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
      };
      double x = 0.0, y = 0.0;
      const bool ok = comma != std::string::npos && parse(std::string_view(line).substr(0, comma), x) &&
                      parse(std::string_view(line).substr(comma + 1), y);
      if (!ok) {
        if (xs.empty() && line_no == 1) continue;  // header row
        fail(path, p.string() + ":" + std::to_string(line_no) + ": expected \"x,value\"");
        return std::nullopt;
      }
      xs.push_back(x);
      ys.push_back(y);
    }
    return std::pair(std::move(xs), std::move(ys));
  }

  std::optional<GridFn> function(const json& v, const std::string& path) {
    if (!object(v, path)) return std::nullopt;
    std::optional<std::vector<double>> grid, values;
    std::optional<TailSpec> tail_spec;
    bool ok = true;
    declared_limit_.reset();
    if (v.contains("constant")) {
      keys(v, path, {"constant", "a"});
      auto c = real(v["constant"], join(path, "constant"));
      double a = 0.0;
      if (auto av = field(v, "a", path, false)) {
        auto d = real(*av, join(path, "a"));
        if (!d) return std::nullopt;
        a = *d;
      }
      if (!c) return std::nullopt;
      return GridFn::constant(*c, a);
    }
    if (v.contains("file")) {
      keys(v, path, {"file", "tail"});
      auto f = string(v["file"], join(path, "file"));
      if (auto t = field(v, "tail", path, false)) {
        tail_spec = tail(*t, join(path, "tail"));
        ok = ok && tail_spec.has_value();
      }
      if (!f) return std::nullopt;
      auto table = read_table(*f, join(path, "file"));
      if (!table || !ok) return std::nullopt;
      grid = std::move(table->first);
      values = std::move(table->second);
    } else {
      keys(v, path, {"grid", "values", "tail"});
      auto g = field(v, "grid", path, true);
      auto vals = field(v, "values", path, true);
      if (g) grid = reals(*g, join(path, "grid"), 2);
      if (vals) values = reals(*vals, join(path, "values"), 2);
      if (auto t = field(v, "tail", path, false)) {
        tail_spec = tail(*t, join(path, "tail"));
        ok = ok && tail_spec.has_value();
      }
      if (!grid || !values || !ok) return std::nullopt;
    }
    if (grid->size() != values->size()) {
      fail(path, "grid and values differ in length (" + std::to_string(grid->size()) + " vs " +
                     std::to_string(values->size()) + ")");
      return std::nullopt;
    }
    if (tail_spec && tail_spec->kind == TailSpec::Kind::limit_value) {
      const double last = values->empty() ? 0.0 : values->back();
      if (declared_limit_ && *declared_limit_ != last) {
        fail(join(path, "tail.limit"), "limit_value tail must equal the last value " + json(last).dump());
        return std::nullopt;
      }
      tail_spec->limit = last;
    }
    try {
      return GridFn(std::move(*grid), std::move(*values), tail_spec);
    } catch (const std::exception& e) {
      fail(path, e.what());
      return std::nullopt;
    }
  }

  std::optional<Interval> interval(const json& v, const std::string& path) {
    if (!object(v, path)) return std::nullopt;
    keys(v, path, {"a", "b"});
    auto a = field(v, "a", path, true);
    auto b = field(v, "b", path, true);
    std::optional<double> av = a ? real(*a, join(path, "a")) : std::nullopt;
    std::optional<double> bv = b ? real(*b, join(path, "b"), true) : std::nullopt;
    if (!av || !bv) return std::nullopt;
    try {
      return Interval(*av, *bv);
    } catch (const std::exception& e) {
      fail(path, e.what());
      return std::nullopt;
    }
  }

  std::optional<EnvironmentKernel> kernel(const json& v, const std::string& path) {
    if (!object(v, path)) return std::nullopt;
    auto kind_v = field(v, "kind", path, true);
    if (!kind_v) return std::nullopt;
    auto kind = string(*kind_v, join(path, "kind"));
    if (!kind) return std::nullopt;
    try {
      if (*kind == "total") {
        keys(v, path, {"kind"});
        return EnvironmentKernel::total();
      }
      if (*kind == "above") {
        keys(v, path, {"kind"});
        return EnvironmentKernel::above();
      }
      if (*kind == "window") {
        keys(v, path, {"kind", "width"});
        auto w = field(v, "width", path, true);
        auto width = w ? positive(*w, join(path, "width")) : std::nullopt;
        if (!width) return std::nullopt;
        return EnvironmentKernel::window(*width);
      }
      if (*kind == "custom") {
        keys(v, path, {"kind", "x_nodes", "y_nodes", "weights"});
        auto xn = field(v, "x_nodes", path, true);
        auto yn = field(v, "y_nodes", path, true);
        auto wt = field(v, "weights", path, true);
        auto x = xn ? reals(*xn, join(path, "x_nodes"), 1) : std::nullopt;
        auto y = yn ? reals(*yn, join(path, "y_nodes"), 2) : std::nullopt;
        auto w = wt ? reals(*wt, join(path, "weights"), 1) : std::nullopt;
        if (!x || !y || !w) return std::nullopt;
        return EnvironmentKernel::custom(std::move(*x), std::move(*y), std::move(*w));
      }
    } catch (const std::exception& e) {
      fail(path, e.what());
      return std::nullopt;
    }
    std::string msg = "unknown kernel kind \"" + *kind + "\"";
    if (auto s = suggest_key(*kind, {"total", "window", "above", "custom"})) msg += " (did you mean \"" + *s + "\"?)";
    fail(join(path, "kind"), msg);
    return std::nullopt;
  }

  std::optional<Modulation> modulation(const json& v, const std::string& path) {
    if (v.is_string() && v == "none") return Modulation{};
    if (!v.is_object()) {
      fail(path, "expected \"none\" or an object with response, c and kernel");
      return std::nullopt;
    }
    keys(v, path, {"response", "c", "kernel"});
    auto r = field(v, "response", path, true);
    auto c = field(v, "c", path, true);
    auto k = field(v, "kernel", path, true);
    std::optional<Response> response;
    if (r) {
      if (auto s = string(*r, join(path, "response"))) {
        response = parse_response(*s);
        if (!response) {
          std::string msg = "unknown response \"" + *s + "\"";
          if (auto sg = suggest_key(*s, {"none", "exp_decay", "hill", "linear_up"}))
            msg += " (did you mean \"" + *sg + "\"?)";
          fail(join(path, "response"), msg);
        }
      }
    }
    auto cv = c ? non_negative(*c, join(path, "c")) : std::nullopt;
    auto kv = k ? kernel(*k, join(path, "kernel")) : std::nullopt;
    if (!response || !cv || !kv) return std::nullopt;
    return Modulation{*response, *cv, std::move(*kv)};
  }

  std::optional<RateSpec> rate(const json& v, const std::string& path) {
    if (!object(v, path)) return std::nullopt;
    keys(v, path, {"base", "modulation"});
    auto b = field(v, "base", path, true);
    auto m = field(v, "modulation", path, true);
    auto base = b ? function(*b, join(path, "base")) : std::nullopt;
    auto mod = m ? modulation(*m, join(path, "modulation")) : std::nullopt;
    if (!base || !mod) return std::nullopt;
    return RateSpec(std::move(*base), std::move(*mod));
  }

  std::optional<VitalRates> rates(const json& v, const std::string& path) {
    if (!object(v, path)) return std::nullopt;
    keys(v, path, {"beta", "mu", "growth"});
    std::optional<RateSpec> parts[3];
    const char* names[3] = {"beta", "mu", "growth"};
    for (int i = 0; i < 3; ++i)
      if (auto f = field(v, names[i], path, true)) parts[i] = rate(*f, join(path, names[i]));
    if (!parts[0] || !parts[1] || !parts[2]) return std::nullopt;
    VitalRates r{std::move(*parts[0]), std::move(*parts[1]), std::move(*parts[2])};
    try {
      r.validate();
    } catch (const std::exception& e) {
      fail(path, e.what());
      return std::nullopt;
    }
    return r;
  }

  std::optional<Density> density(const json& v, const std::string& path) {
    if (v.is_string() && v == "zero") return Density::zero();
    if (v.is_string()) {
      fail(path, "expected \"zero\" or a function record");
      return std::nullopt;
    }
    auto f = function(v, path);
    if (!f) return std::nullopt;
    try {
      return Density(std::move(*f));
    } catch (const std::exception& e) {
      fail(path, e.what());
      return std::nullopt;
    }
  }

  std::optional<Direction> direction(const json& v, const std::string& path) {
    auto s = string(v, path);
    if (!s) return std::nullopt;
    if (auto d = parse_direction(*s)) return d;
    std::string msg = "unknown direction \"" + *s + "\"";
    if (auto sg = suggest_key(*s, {"increasing", "non_decreasing", "decreasing", "non_increasing"}))
      msg += " (did you mean \"" + *sg + "\"?)";
    fail(path, msg);
    return std::nullopt;
  }

  void quadrature(const json& v, const std::string& path, PopulationConfig& cfg) {
    if (!object(v, path)) return;
    keys(v, path, kCfgKeys);
    if (auto f = field(v, "panel_points", path, false))
      if (auto n = integer(*f, join(path, "panel_points"), 2)) cfg.quad.panel_points = static_cast<int>(std::min(*n, 1000000LL));
    auto pos = [&](const char* key, double& out) {
      if (auto f = field(v, key, path, false))
        if (auto d = positive(*f, join(path, key))) out = *d;
    };
    pos("tail_tol", cfg.quad.tail_tol);
    pos("max_domain", cfg.quad.max_domain);
    pos("max_hazard_step", cfg.quad.max_hazard_step);
    pos("max_step", cfg.max_step);
    pos("hazard_step", cfg.hazard_step);
    pos("hazard_span", cfg.hazard_span);
    if (cfg.hazard_step >= 1.0) fail(join(path, "hazard_step"), "must be < 1");
  }

  void solver(const json& v, const std::string& path, SolverConfig& s, std::pair<double, double>& bracket) {
    if (!object(v, path)) return;
    keys(v, path, kSolverKeys);
    auto pos = [&](const char* key, double& out) {
      if (auto f = field(v, key, path, false))
        if (auto d = positive(*f, join(path, key))) out = *d;
    };
    pos("tol_R", s.tol_R);
    pos("tol_inner", s.tol_inner);
    pos("tol_fix", s.tol_fix);
    pos("bisection_tol", s.bisection_tol);
    pos("damping", s.damping);
    if (s.damping > 1.0) fail(join(path, "damping"), "must be <= 1");
    auto count = [&](const char* key, int& out) {
      if (auto f = field(v, key, path, false))
        if (auto n = integer(*f, join(path, key), 1)) out = static_cast<int>(std::min(*n, 1000000000LL));
    };
    count("max_inner", s.max_inner);
    count("max_outer", s.max_outer);
    if (auto f = field(v, "bracket", path, false)) {
      if (auto b = reals(*f, join(path, "bracket"), 2)) {
        if (b->size() != 2) fail(join(path, "bracket"), "expected [lo, hi]");
        else if (!((*b)[0] >= 0.0 && (*b)[1] > (*b)[0])) fail(join(path, "bracket"), "expected 0 <= lo < hi");
        else bracket = {(*b)[0], (*b)[1]};
      }
    }
  }

 private:
  fs::path base_dir_;
  std::optional<double> declared_limit_;
};

}  // namespace

ScenarioConfig parse_config(std::string_view text, const fs::path& base_dir, std::string name) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, false);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string detail = e.what();
    if (auto pos = detail.rfind(": "); pos != std::string::npos) detail = detail.substr(pos + 2);
    throw ConfigError("", "parse error at line " + std::to_string(line) + ", column " +
                                std::to_string(column) + ": " + detail);
  }

  Reader rd(base_dir);
  if (!doc.is_object()) throw ConfigError("", "top level must be an object");

  ScenarioConfig out{};
  out.name = std::move(name);

  if (auto s = rd.field(doc, "schema", "", true)) {
    if (!s->is_number_integer() || s->get<long long>() != 1) rd.fail("schema", "unsupported schema version (expected 1)");
  }
  std::optional<ScenarioKind> kind;
  if (auto k = rd.field(doc, "kind", "", true)) {
    if (auto s = rd.string(*k, "kind")) {
      kind = parse_kind(*s);
      if (!kind) {
        std::vector<std::string> names;
        for (ScenarioKind sk : all_kinds()) names.emplace_back(to_string(sk));
        std::string msg = "unknown scenario kind \"" + *s + "\"";
        if (auto sg = suggest_key(*s, names)) msg += " (did you mean \"" + *sg + "\"?)";
        rd.fail("kind", msg);
      }
    }
  }

  std::vector<std::string> allowed = kCommonKeys;
  if (kind) {
    for (auto& k : kind_keys(*kind)) allowed.push_back(k);
  } else {
    for (ScenarioKind sk : all_kinds())
      for (auto& k : kind_keys(sk))
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) allowed.push_back(k);
  }
  rd.keys(doc, "", allowed);

  if (auto s = rd.field(doc, "seed", "", false)) {
    if (s->is_number_unsigned()) out.seed = s->get<std::uint64_t>();
    else if (s->is_number_integer() && s->get<long long>() >= 0) out.seed = static_cast<std::uint64_t>(s->get<long long>());
    else rd.fail("seed", "expected a non-negative integer");
  }
  if (auto p = rd.field(doc, "output_path", "", false))
    if (auto s = rd.string(*p, "output_path")) out.output_path = *s;
  if (auto c = rd.field(doc, "cfg", "", false)) rd.quadrature(*c, "cfg", out.cfg);

  if (!kind) throw ConfigError(std::move(rd.issues));
  out.kind = *kind;

  auto fn = [&](const char* key) -> std::optional<GridFn> {
    auto f = rd.field(doc, key, "", true);
    return f ? rd.function(*f, key) : std::nullopt;
  };
  auto rates = [&]() -> std::optional<VitalRates> {
    auto f = rd.field(doc, "rates", "", true);
    return f ? rd.rates(*f, "rates") : std::nullopt;
  };
  auto interval = [&]() -> std::optional<Interval> {
    auto f = rd.field(doc, "interval", "", true);
    return f ? rd.interval(*f, "interval") : std::nullopt;
  };

  std::optional<ScenarioSpec> spec;
  switch (*kind) {
    case ScenarioKind::integrate: {
      auto h = fn("h");
      auto g = fn("g");
      auto iv = interval();
      if (h && g && iv) spec = IntegrateSpec{std::move(*h), std::move(*g), *iv};
      break;
    }
    case ScenarioKind::ibp_check: {
      auto h = fn("h");
      std::optional<Direction> dir;
      if (auto d = rd.field(doc, "h_direction", "", true)) dir = rd.direction(*d, "h_direction");
      auto g = fn("g");
      auto iv = interval();
      if (h && dir && g && iv) spec = IbpSpec{std::move(*h), *dir, std::move(*g), *iv};
      break;
    }
    case ScenarioKind::prop_suite: {
      PropSuiteSpec ps;
      bool ok = true;
      if (auto n = rd.field(doc, "n_instances", "", true)) {
        if (auto v = rd.integer(*n, "n_instances", 1)) ps.n_instances = static_cast<std::size_t>(*v);
        else ok = false;
      } else {
        ok = false;
      }
      if (auto t = rd.field(doc, "threads", "", false)) {
        if (auto v = rd.integer(*t, "threads", 1)) ps.threads = static_cast<unsigned>(std::min(*v, 1024LL));
        else ok = false;
      }
      if (auto s = rd.field(doc, "suite", "", false)) {
        if (auto v = rd.string(*s, "suite")) {
          if (*v == "properties") ps.suite = PropSuiteSpec::Suite::properties;
          else if (*v == "R_monotone") ps.suite = PropSuiteSpec::Suite::R_monotone;
          else {
            std::string msg = "unknown suite \"" + *v + "\"";
            if (auto sg = suggest_key(*v, {"properties", "R_monotone"})) msg += " (did you mean \"" + *sg + "\"?)";
            rd.fail("suite", msg);
            ok = false;
          }
        } else {
          ok = false;
        }
      }
      if (auto e = rd.field(doc, "hm_exponents", "", false)) {
        if (auto v = rd.reals(*e, "hm_exponents", 1)) {
          for (std::size_t i = 0; i < v->size(); ++i)
            if (!((*v)[i] > 0.0)) {
              rd.fail(index("hm_exponents", i), "must be > 0");
              ok = false;
            }
          ps.hm_exponents = std::move(*v);
        } else {
          ok = false;
        }
      }
      if (auto th = rd.field(doc, "test_hooks", "", false)) {
        if (rd.object(*th, "test_hooks")) {
          rd.keys(*th, "test_hooks", {"corrupt_integrator"});
          if (auto c = rd.field(*th, "corrupt_integrator", "test_hooks", false)) {
            if (c->is_boolean()) ps.corrupt_integrator = c->get<bool>();
            else rd.fail("test_hooks.corrupt_integrator", "expected a boolean");
          }
        }
      }
      if (ok) spec = ps;
      break;
    }
    case ScenarioKind::hm_check: {
      auto h = fn("h");
      auto g = fn("g");
      std::optional<std::vector<double>> ps;
      if (auto e = rd.field(doc, "exponents", "", true)) {
        ps = rd.reals(*e, "exponents", 1);
        if (ps)
          for (std::size_t i = 0; i < ps->size(); ++i)
            if (!((*ps)[i] > 0.0)) {
              rd.fail(index("exponents", i), "must be > 0");
              ps.reset();
              break;
            }
      }
      if (h && g && ps) spec = HmSpec{std::move(*h), std::move(*g), std::move(*ps)};
      break;
    }
    case ScenarioKind::reproduction: {
      auto r = rates();
      std::optional<Density> u;
      if (auto d = rd.field(doc, "density", "", true)) u = rd.density(*d, "density");
      if (r && u) spec = ReproductionSpec{std::move(*r), std::move(*u)};
      break;
    }
    case ScenarioKind::equilibrium: {
      auto r = rates();
      if (auto s = rd.field(doc, "solver", "", false)) rd.solver(*s, "solver", out.solver, out.bracket);
      if (r) spec = EquilibriumSpec{std::move(*r)};
      break;
    }
    case ScenarioKind::threshold: {
      auto r = rates();
      if (r) spec = ThresholdSpec{std::move(*r)};
      break;
    }
  }

  if (rd.issues.empty()) {
    try {
      out.cfg.validate();
    } catch (const std::exception& e) {
      rd.fail("cfg", e.what());
    }
    try {
      out.solver.validate();
    } catch (const std::exception& e) {
      rd.fail("solver", e.what());
    }
  }
  if (!rd.issues.empty() || !spec) {
    if (rd.issues.empty()) rd.fail("", "incomplete scenario");
    throw ConfigError(std::move(rd.issues));
  }
  out.spec = std::move(*spec);
  return out;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), path.stem().string());
}

}  // namespace bvpop::cli
