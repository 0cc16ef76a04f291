#include "gseq/serialize.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "json.hpp"

#include "gseq/errors.hpp"

namespace gseq {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw invalid_data_error(where + ": " + what);
}

json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(where, std::string("JSON parse error: ") + e.what());
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

Sidedness sidedness_from(const json& v, const std::string& where) {
  const std::string s = as_string(v, where);
  if (s == "one-sided") return Sidedness::one_sided;
  if (s == "two-sided") return Sidedness::two_sided;
  fail(where, "sidedness must be 'one-sided' or 'two-sided', got '" + s + "'");
}

std::string sidedness_str(Sidedness s) {
  return s == Sidedness::one_sided ? "one-sided" : "two-sided";
}

Ratio ratio_from(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return Ratio::parse(v.get<std::string>());
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
  if (v.is_number_integer()) {
    const std::int64_t n = v.get<std::int64_t>();
    if (n <= 0) fail(where, "gamma must be positive");
    return Ratio{n, 1};
  }
  fail(where, "gamma must be a positive integer or a 'num/den' string");
}

json ratio_to(const Ratio& r) {
  if (r.den == 1) return json(r.num);
  return json(r.str());
}

SpendingFunction spending_from(const json& v, double alpha, const std::string& where) {
  std::string kind;
  const json* obj = nullptr;
  if (v.is_string()) {
    kind = v.get<std::string>();
  } else if (v.is_object()) {
    kind = as_string(require(v, "kind", where), where + ".kind");
    obj = &v;
  } else {
    fail(where, "spending must be a kind string or an object with a 'kind' field");
  }
  try {
    if (kind == "pocock") return SpendingFunction::pocock(alpha);
    if (kind == "obrien-fleming") return SpendingFunction::obrien_fleming(alpha);
    if (kind == "custom") {
      if (obj == nullptr) fail(where, "custom spending needs a 'table' field");
      const json& tbl = require(*obj, "table", where);
      if (!tbl.is_array()) fail(where + ".table", "expected an array of [t, spend] pairs");
      std::vector<std::pair<double, double>> table;
      for (const auto& row : tbl) {
        if (!row.is_array() || row.size() != 2) {
          fail(where + ".table", "each knot must be a [t, spend] pair");
        }
        table.emplace_back(as_number(row[0], where + ".table"),
                           as_number(row[1], where + ".table"));
      }
      return SpendingFunction::custom(alpha, std::move(table));
    }
  } catch (const invalid_data_error&) {
    throw;
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  fail(where, "unknown spending kind '" + kind + "' (expected pocock, obrien-fleming or custom)");
}

json spending_to(const SpendingFunction& f) {
  switch (f.kind()) {
    case SpendingKind::pocock:
      return json("pocock");
    case SpendingKind::obrien_fleming:
      return json("obrien-fleming");
    case SpendingKind::custom_table: {
      json obj;
      obj["kind"] = "custom";
      json table = json::array();
      for (const auto& [t, s] : f.table()) table.push_back(json::array({t, s}));
      obj["table"] = std::move(table);
      return obj;
    }
  }
  throw std::logic_error("unreachable spending kind");
}

std::vector<std::int64_t> int_array_from(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of integers");
  std::vector<std::int64_t> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(as_integer(x, where));
  return out;
}

DesignSpec design_from(const json& obj, const std::string& where) {
  DesignSpec spec;
  spec.k = static_cast<int>(as_integer(require(obj, "k", where), where + ".k"));
  if (spec.k < 1) fail(where + ".k", "k must be at least 1");
  spec.gamma = ratio_from(require(obj, "gamma", where), where + ".gamma");
  spec.alpha = as_number(require(obj, "alpha", where), where + ".alpha");
  spec.sidedness = sidedness_from(require(obj, "sidedness", where), where + ".sidedness");
  spec.spending =
      spending_from(require(obj, "spending", where), spec.alpha, where + ".spending");
  if (obj.contains("info_mode")) {
    const std::string mode = as_string(obj["info_mode"], where + ".info_mode");
    if (mode == "sample-size") {
      spec.info_mode = InfoMode::sample_size;
    } else if (mode == "estimated-information") {
      spec.info_mode = InfoMode::estimated_information;
    } else {
      fail(where + ".info_mode", "expected 'sample-size' or 'estimated-information'");
    }
  }
  if (obj.contains("i_max") && !obj["i_max"].is_null()) {
    spec.i_max = as_number(obj["i_max"], where + ".i_max");
  }

  const bool has_planned = obj.contains("planned_n") || obj.contains("planned_m");
  if (has_planned) {
    spec.planned_n = int_array_from(require(obj, "planned_n", where), where + ".planned_n");
    spec.planned_m = int_array_from(require(obj, "planned_m", where), where + ".planned_m");
  } else if (obj.contains("n0")) {
    // Balanced shorthand: every stage adds n0 controls and gamma*n0 treatments.
    const std::int64_t n0 = as_integer(obj["n0"], where + ".n0");
    if (n0 < 1) fail(where + ".n0", "n0 must be positive");
    if ((spec.gamma.num * n0) % spec.gamma.den != 0) {
      fail(where + ".n0", "gamma * n0 must be an integer treatment size");
    }
    spec.planned_n.assign(static_cast<std::size_t>(spec.k), n0);
    spec.planned_m.assign(static_cast<std::size_t>(spec.k), spec.gamma.num * n0 / spec.gamma.den);
  } else {
    fail(where, "need either planned_n/planned_m or the balanced shorthand n0");
  }
  try {
    spec.validate();
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  return spec;
}

json design_to(const DesignSpec& spec) {
  json obj;
  obj["k"] = spec.k;
  obj["gamma"] = ratio_to(spec.gamma);
  obj["alpha"] = spec.alpha;
  obj["sidedness"] = sidedness_str(spec.sidedness);
  obj["spending"] = spending_to(*spec.spending);
  obj["planned_n"] = spec.planned_n;
  obj["planned_m"] = spec.planned_m;
  obj["info_mode"] = spec.info_mode == InfoMode::sample_size ? "sample-size"
                                                             : "estimated-information";
  if (spec.i_max) obj["i_max"] = *spec.i_max;
  return obj;
}

json boundary_value_to(double v) {
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  return json(v);
}

double boundary_value_from(const json& v, const std::string& where) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    fail(where, "unknown boundary sentinel '" + s + "'");
  }
  return as_number(v, where);
}

Method method_from(const json& v, const std::string& where) {
  try {
    return parse_method(as_string(v, where));
  } catch (const invalid_data_error&) {
    throw;
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
}

json boundary_set_to(const BoundarySet& set) {
  json obj;
  obj["method"] = method_name(set.method);
  obj["sidedness"] = sidedness_str(set.sidedness);
  json values = json::array();
  for (double v : set.values) values.push_back(boundary_value_to(v));
  obj["values"] = std::move(values);
  obj["attained_spend"] = set.attained_spend;
  return obj;
}

BoundarySet boundary_set_from(const json& obj, const std::string& where) {
  BoundarySet set;
  set.method = method_from(require(obj, "method", where), where + ".method");
  set.sidedness = sidedness_from(require(obj, "sidedness", where), where + ".sidedness");
  const json& values = require(obj, "values", where);
  if (!values.is_array() || values.empty()) {
    fail(where + ".values", "expected a non-empty array");
  }
  for (const auto& v : values) {
    set.values.push_back(boundary_value_from(v, where + ".values"));
  }
  const json& spendv = require(obj, "attained_spend", where);
  if (!spendv.is_array() || spendv.size() != values.size()) {
    fail(where + ".attained_spend", "expected one entry per look");
  }
  for (const auto& v : spendv) {
    set.attained_spend.push_back(as_number(v, where + ".attained_spend"));
  }
  return set;
}

json decision_trace_to(const DecisionTrace& trace) {
  json obj;
  obj["method"] = method_name(trace.method);
  obj["stop_stage"] = trace.stop_stage;
  obj["rejected"] = trace.rejected;
  json looks = json::array();
  for (const auto& cmp : trace.looks) {
    json l;
    l["k"] = cmp.k;
    l["s"] = cmp.s;
    l["c"] = boundary_value_to(cmp.c);
    l["crossed"] = cmp.crossed;
    looks.push_back(std::move(l));
  }
  obj["looks"] = std::move(looks);
  return obj;
}

DistSpec dist_from(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected a distribution object");
  const std::string kind = as_string(require(v, "kind", where), where + ".kind");
  DistSpec d;
  try {
    if (kind == "normal") {
      d = DistSpec::normal(as_number(require(v, "mean", where), where + ".mean"),
                           as_number(require(v, "var", where), where + ".var"));
    } else if (kind == "t") {
      d = DistSpec::student_t(as_number(require(v, "nu", where), where + ".nu"));
    } else if (kind == "exponential" || kind == "exp") {
      d = DistSpec::exponential();
    } else if (kind == "laplace") {
      d = DistSpec::laplace();
    } else if (kind == "lognormal") {
      d = DistSpec::lognormal();
    } else {
      fail(where + ".kind",
           "unknown distribution '" + kind +
               "' (expected normal, t, exponential, laplace or lognormal)");
    }
    if (v.contains("shift")) {
      d.shift = as_number(v["shift"], where + ".shift");
      d.validate();
    }
  } catch (const invalid_data_error&) {
    throw;
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  return d;
}

json dist_to(const DistSpec& d) {
  json obj;
  switch (d.kind) {
    case DistKind::normal:
      obj["kind"] = "normal";
      obj["mean"] = d.mean_param;
      obj["var"] = d.var_param;
      break;
    case DistKind::student_t:
      obj["kind"] = "t";
      obj["nu"] = d.nu;
      break;
    case DistKind::exponential:
      obj["kind"] = "exponential";
      break;
    case DistKind::laplace:
      obj["kind"] = "laplace";
      break;
    case DistKind::lognormal:
      obj["kind"] = "lognormal";
      break;
  }
  if (d.shift != 0.0) obj["shift"] = d.shift;
  return obj;
}

ScenarioConfig scenario_from(const json& obj, const std::string& where) {
  ScenarioConfig cfg;
  cfg.id = as_string(require(obj, "id", where), where + ".id");
  const std::string here = where + " (id '" + cfg.id + "')";
  cfg.design = design_from(require(obj, "design", here), here + ".design");
  cfg.f1 = dist_from(require(obj, "f1", here), here + ".f1");
  cfg.f2 = dist_from(require(obj, "f2", here), here + ".f2");
  if (obj.contains("mu")) cfg.mu = as_number(obj["mu"], here + ".mu");
  cfg.n0 = cfg.design.planned_n.front();
  if (obj.contains("methods")) {
    const json& arr = obj["methods"];
    if (!arr.is_array() || arr.empty()) fail(here + ".methods", "expected a non-empty array");
    cfg.methods.clear();
    for (const auto& m : arr) cfg.methods.push_back(method_from(m, here + ".methods"));
  }
  if (obj.contains("b")) {
    cfg.permutation_replicates = as_integer(obj["b"], here + ".b");
  }
  if (obj.contains("r")) {
    cfg.simulations = as_integer(obj["r"], here + ".r");
  } else {
    fail(here, "missing field 'r' (simulation count)");
  }
  if (obj.contains("seed")) {
    const std::int64_t s = as_integer(obj["seed"], here + ".seed");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (obj.contains("boundary_mode")) {
    const std::string m = as_string(obj["boundary_mode"], here + ".boundary_mode");
    if (m == "freeze") {
      cfg.boundary_mode = BoundaryMode::freeze;
    } else if (m == "full-recompute") {
      cfg.boundary_mode = BoundaryMode::full_recompute;
    } else {
      fail(here + ".boundary_mode", "expected 'freeze' or 'full-recompute'");
    }
  }
  if (obj.contains("permutation_mode")) {
    const std::string m = as_string(obj["permutation_mode"], here + ".permutation_mode");
    if (m == "monte-carlo") {
      cfg.permutation_mode = ResampleMode::monte_carlo;
    } else if (m == "exhaustive") {
      cfg.permutation_mode = ResampleMode::exhaustive;
    } else {
      fail(here + ".permutation_mode", "expected 'monte-carlo' or 'exhaustive'");
    }
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    fail(here, e.what());
  }
  return cfg;
}

json scenario_to(const ScenarioConfig& cfg) {
  json obj;
  obj["id"] = cfg.id;
  obj["design"] = design_to(cfg.design);
  obj["f1"] = dist_to(cfg.f1);
  obj["f2"] = dist_to(cfg.f2);
  obj["mu"] = cfg.mu;
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(method_name(m));
  obj["methods"] = std::move(methods);
  obj["b"] = cfg.permutation_replicates;
  obj["r"] = cfg.simulations;
  obj["seed"] = cfg.seed;
  obj["boundary_mode"] =
      cfg.boundary_mode == BoundaryMode::freeze ? "freeze" : "full-recompute";
  obj["permutation_mode"] =
      cfg.permutation_mode == ResampleMode::exhaustive ? "exhaustive" : "monte-carlo";
  return obj;
}

}  // namespace

std::string design_to_json(const DesignSpec& spec) { return design_to(spec).dump(2) + "\n"; }

DesignSpec design_from_json(const std::string& text) {
  return design_from(parse_text(text, "design"), "design");
}

std::string boundary_set_to_json(const BoundarySet& set) {
  return boundary_set_to(set).dump(2) + "\n";
}

BoundarySet boundary_set_from_json(const std::string& text) {
  return boundary_set_from(parse_text(text, "boundaries"), "boundaries");
}

std::string decision_trace_to_json(const DecisionTrace& trace) {
  return decision_trace_to(trace).dump(2) + "\n";
}

std::string interim_result_to_json(const InterimResult& result, BoundaryMode mode) {
  json obj;
  obj["method"] = method_name(result.boundaries.method);
  obj["boundary_mode"] = mode == BoundaryMode::freeze ? "freeze" : "full-recompute";
  obj["fractions"] = result.fractions;
  obj["boundaries"] = boundary_set_to(result.boundaries);
  obj["decision"] = decision_trace_to(result.trace);
  if (result.permutation) {
    const PermutationBoundaryResult& p = *result.permutation;
    json perm;
    perm["b"] = p.replicate_count;
    perm["mode"] = p.mode == ResampleMode::exhaustive ? "exhaustive" : "monte-carlo";
    perm["survivors_per_look"] = p.survivors_per_look;
    perm["crossing_counts"] = p.crossing_counts;
    perm["degenerate_replicates"] = p.degenerate_replicates;
    obj["permutation"] = std::move(perm);
  }
  return obj.dump(2) + "\n";
}

std::vector<ScenarioConfig> scenarios_from_json(const std::string& text) {
  const json root = parse_text(text, "scenarios");
  const json& arr = require(root, "scenarios", "scenarios");
  if (!arr.is_array()) fail("scenarios", "'scenarios' must be an array");
  std::vector<ScenarioConfig> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(scenario_from(arr[i], "scenarios[" + std::to_string(i) + "]"));
  }
  return out;
}

std::string scenarios_to_json(std::span<const ScenarioConfig> scenarios) {
  json root;
  json arr = json::array();
  for (const auto& cfg : scenarios) arr.push_back(scenario_to(cfg));
  root["scenarios"] = std::move(arr);
  return root.dump(2) + "\n";
}

std::string dist_to_json(const DistSpec& dist) { return dist_to(dist).dump(2) + "\n"; }

DistSpec dist_from_json(const std::string& text) {
  return dist_from(parse_text(text, "distribution"), "distribution");
}

}  // namespace gseq
