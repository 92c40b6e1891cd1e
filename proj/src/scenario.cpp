#include "causalkit/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "causalkit/error.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SemanticError, where.empty() ? what : where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& required,
                const std::set<std::string>& optional) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  std::vector<std::string> missing;
  for (const auto& key : required) {
    if (!obj.contains(key)) missing.push_back(key);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    schema_error(where, "missing required key(s): " + list);
  }
  for (const auto& [key, value] : obj.items()) {
    if (!required.count(key) && !optional.count(key)) schema_error(where, "unknown key '" + key + "'");
  }
}

std::string get_string(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string()) schema_error(where, "'" + key + "' must be a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) schema_error(where, "'" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_unsigned(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) schema_error(where, "'" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) schema_error(where, "'" + key + "' must be true or false");
  return v.get<bool>();
}

std::vector<std::string> get_names(const json& obj, const std::string& key,
                                   const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_array()) schema_error(where, "'" + key + "' must be a list of names");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) schema_error(where, "'" + key + "' must be a list of names");
    out.push_back(item.get<std::string>());
  }
  return out;
}

Equation parse_equation(const json& obj, std::size_t index) {
  const std::string where = "nodes[" + std::to_string(index) + "]";
  check_keys(obj, where, {"name", "intercept"}, {"parents"});
  Equation eq;
  eq.node = get_string(obj, "name", where);
  eq.intercept = get_number(obj, "intercept", where);
  if (obj.contains("parents")) {
    const json& parents = obj.at("parents");
    if (!parents.is_object()) schema_error(where, "'parents' must map names to coefficients");
    for (const auto& [name, coef] : parents.items()) {
      if (!coef.is_number()) schema_error(where, "coefficient of '" + name + "' must be a number");
      eq.parents[name] = coef.get<double>();
    }
  }
  return eq;
}

AnalysisRequest parse_analysis(const json& obj, std::size_t index, bool& derived_seed) {
  const std::string where = "analyses[" + std::to_string(index) + "]";
  check_keys(obj, where, {"method", "treatment", "outcome"},
             {"adjust", "interactions", "bootstrap", "family", "level", "label"});
  AnalysisRequest r;
  auto method = parse_method(get_string(obj, "method", where));
  if (!method) {
    schema_error(where, "unknown method '" + obj.at("method").get<std::string>() +
                            "' (expected unadjusted, outcome_regression, g_computation or ipw)");
  }
  r.method = *method;
  r.treatment = get_string(obj, "treatment", where);
  r.outcome = get_string(obj, "outcome", where);
  if (obj.contains("adjust")) r.adjust = get_names(obj, "adjust", where);
  if (obj.contains("interactions")) r.interactions = get_bool(obj, "interactions", where);
  if (obj.contains("family")) {
    auto family = get_string(obj, "family", where);
    if (family == "binomial") {
      r.family = Family::binomial;
    } else if (family == "poisson") {
      r.family = Family::poisson;
    } else {
      schema_error(where, "unknown family '" + family + "'");
    }
  }
  if (obj.contains("level")) r.level = get_number(obj, "level", where);
  if (obj.contains("label")) r.label = get_string(obj, "label", where);
  derived_seed = false;
  if (obj.contains("bootstrap")) {
    const json& b = obj.at("bootstrap");
    const std::string bw = where + ".bootstrap";
    check_keys(b, bw, {"replicates"}, {"seed", "threads"});
    BootstrapSpec spec;
    spec.replicates = get_unsigned(b, "replicates", bw);
    spec.level = r.level;
    if (b.contains("seed")) {
      spec.seed = get_unsigned(b, "seed", bw);
    } else {
      derived_seed = true;
    }
    if (b.contains("threads")) spec.threads = static_cast<unsigned>(get_unsigned(b, "threads", bw));
    r.bootstrap = spec;
  }
  return r;
}

std::string analysis_where(std::size_t index) {
  return "analyses[" + std::to_string(index) + "]";
}

}  // namespace

std::uint64_t derived_bootstrap_seed(std::uint64_t scenario_seed, std::size_t analysis_index) {
  return mix(~scenario_seed, analysis_index);
}

void finalize_scenario(Scenario& s) {
  try {
    validate_model(s.model);
  } catch (const Error& e) {
    schema_error("nodes", e.what());
  }
  if (s.sample_size == 0) schema_error("sample_size", "must be at least 1");

  const auto has = [&](const std::string& n) { return s.model.has_node(n); };
  CausalDag dag = model_dag(s.model);
  for (const auto& [role, node] : std::vector<std::pair<Role, std::string>>{
           {Role::treatment, s.dag.treatment().value_or("")},
           {Role::outcome, s.dag.outcome().value_or("")}}) {
    if (node.empty()) continue;
    if (!has(node)) schema_error("roles", "unknown node '" + node + "'");
    dag.set_role(node, role);
  }
  for (const auto& edge : s.analysis_edges) {
    if (!has(edge.parent) || !has(edge.child)) {
      schema_error("analysis_edges", "edge " + edge.parent + " -> " + edge.child +
                                         " names a node outside the model");
    }
    if (dag.has_edge(edge.parent, edge.child)) {
      schema_error("analysis_edges",
                   "edge " + edge.parent + " -> " + edge.child + " is already in the model");
    }
    dag.add_edge(edge.parent, edge.child);
  }
  if (s.selection) {
    if (!has(s.selection->node)) {
      schema_error("selection", "unknown node '" + s.selection->node + "'");
    }
    if (s.selection->value != 0 && s.selection->value != 1) {
      schema_error("selection", "value must be 0 or 1");
    }
    if (dag.role_of(s.selection->node) == Role::plain) {
      dag.set_role(s.selection->node, Role::conditioned);
    }
  }
  try {
    validate(dag);
  } catch (const Error& e) {
    schema_error("analysis_edges", e.what());
  }
  s.dag = std::move(dag);

  s.derived_bootstrap_seed.resize(s.analyses.size(), false);
  for (std::size_t i = 0; i < s.analyses.size(); ++i) {
    const auto& a = s.analyses[i];
    std::vector<std::string> names = {a.treatment, a.outcome};
    names.insert(names.end(), a.adjust.begin(), a.adjust.end());
    for (const auto& n : names) {
      if (!has(n)) schema_error(analysis_where(i), "unknown column '" + n + "'");
    }
    if (a.treatment == a.outcome) schema_error(analysis_where(i), "treatment equals outcome");
    if (!(a.level > 0 && a.level < 1)) schema_error(analysis_where(i), "level must be in (0, 1)");
    if (a.bootstrap && a.bootstrap->replicates < minimum_replicates(a.level)) {
      schema_error(analysis_where(i),
                   "bootstrap needs at least " + std::to_string(minimum_replicates(a.level)) +
                       " replicates at level " + std::to_string(a.level));
    }
  }
}

void reseed(Scenario& s, std::uint64_t seed) {
  s.seed = seed;
  for (std::size_t i = 0; i < s.analyses.size(); ++i) {
    if (s.analyses[i].bootstrap && i < s.derived_bootstrap_seed.size() &&
        s.derived_bootstrap_seed[i]) {
      s.analyses[i].bootstrap->seed = derived_bootstrap_seed(seed, i);
    }
  }
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, std::string("malformed JSON: ") + e.what());
  }
  check_keys(doc, "", {"nodes", "sample_size", "seed", "analyses"},
             {"name", "selection", "roles", "analysis_edges"});

  Scenario s;
  if (doc.contains("name")) s.name = get_string(doc, "name", "");
  if (!doc.at("nodes").is_array()) schema_error("nodes", "must be a list");
  std::size_t i = 0;
  for (const auto& node : doc.at("nodes")) s.model.equations.push_back(parse_equation(node, i++));
  s.sample_size = get_unsigned(doc, "sample_size", "");
  s.seed = get_unsigned(doc, "seed", "");

  if (doc.contains("selection")) {
    const json& sel = doc.at("selection");
    check_keys(sel, "selection", {"node", "value"}, {});
    const json& v = sel.at("value");
    if (!v.is_number_integer()) schema_error("selection", "'value' must be 0 or 1");
    s.selection = SelectionRule{get_string(sel, "node", "selection"), v.get<int>()};
  }
  if (doc.contains("roles")) {
    const json& roles = doc.at("roles");
    check_keys(roles, "roles", {}, {"treatment", "outcome"});
    // Stashed on the diagram; finalize_scenario moves them onto the real one.
    if (roles.contains("treatment")) {
      s.dag.set_role(get_string(roles, "treatment", "roles"), Role::treatment);
    }
    if (roles.contains("outcome")) {
      s.dag.set_role(get_string(roles, "outcome", "roles"), Role::outcome);
    }
  }
  if (doc.contains("analysis_edges")) {
    const json& edges = doc.at("analysis_edges");
    if (!edges.is_array()) schema_error("analysis_edges", "must be a list of [parent, child]");
    for (const auto& e : edges) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
        schema_error("analysis_edges", "each edge must be [parent, child]");
      }
      s.analysis_edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    }
  }
  if (!doc.at("analyses").is_array()) schema_error("analyses", "must be a list");
  i = 0;
  for (const auto& a : doc.at("analyses")) {
    bool derived = false;
    s.analyses.push_back(parse_analysis(a, i, derived));
    s.derived_bootstrap_seed.push_back(derived);
    ++i;
  }
  finalize_scenario(s);
  reseed(s, s.seed);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message(), e.line(), e.nodes());
  }
}

namespace {

ordered_json model_json(const StructuralModel& model) {
  ordered_json nodes = ordered_json::array();
  for (const auto& eq : model.equations) {
    ordered_json parents = ordered_json::object();
    for (const auto& [name, coef] : eq.parents) parents[name] = coef;
    nodes.push_back({{"name", eq.node}, {"intercept", eq.intercept}, {"parents", parents}});
  }
  return nodes;
}

}  // namespace

std::string model_to_json(const StructuralModel& model) { return model_json(model).dump(2); }

std::string scenario_to_json(const Scenario& s) {
  ordered_json doc;
  if (!s.name.empty()) doc["name"] = s.name;
  doc["nodes"] = model_json(s.model);
  doc["sample_size"] = s.sample_size;
  doc["seed"] = s.seed;
  if (s.selection) doc["selection"] = {{"node", s.selection->node}, {"value", s.selection->value}};
  if (s.dag.treatment() || s.dag.outcome()) {
    ordered_json roles = ordered_json::object();
    if (auto t = s.dag.treatment()) roles["treatment"] = *t;
    if (auto o = s.dag.outcome()) roles["outcome"] = *o;
    doc["roles"] = roles;
  }
  if (!s.analysis_edges.empty()) {
    ordered_json edges = ordered_json::array();
    for (const auto& e : s.analysis_edges) edges.push_back({e.parent, e.child});
    doc["analysis_edges"] = edges;
  }
  ordered_json analyses = ordered_json::array();
  for (std::size_t i = 0; i < s.analyses.size(); ++i) {
    const auto& a = s.analyses[i];
    ordered_json item;
    item["method"] = std::string(to_string(a.method));
    item["treatment"] = a.treatment;
    item["outcome"] = a.outcome;
    item["adjust"] = a.adjust;
    if (a.interactions) item["interactions"] = true;
    if (a.family != Family::binomial) item["family"] = std::string(to_string(a.family));
    if (a.level != 0.95) item["level"] = a.level;
    if (!a.label.empty()) item["label"] = a.label;
    if (a.bootstrap) {
      ordered_json b;
      b["replicates"] = a.bootstrap->replicates;
      bool derived = i < s.derived_bootstrap_seed.size() && s.derived_bootstrap_seed[i];
      if (!derived) b["seed"] = a.bootstrap->seed;
      if (a.bootstrap->threads != 1) b["threads"] = a.bootstrap->threads;
      item["bootstrap"] = b;
    }
    analyses.push_back(item);
  }
  doc["analyses"] = analyses;
  return doc.dump(2) + "\n";
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env_value,
                           std::uint64_t file_seed) {
  if (flag) return *flag;
  if (env_value && *env_value) {
    std::string_view text(env_value);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw Error(ErrorCode::SemanticError,
                  std::string(kSeedEnvVar) + " must be an unsigned integer, got '" +
                      std::string(text) + "'");
    }
    return value;
  }
  return file_seed;
}

bool ResultTable::ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.estimate.has_value(); });
}

ResultTable run_analyses(const Scenario& s, const Dataset& data, std::optional<unsigned> threads) {
  ResultTable table;
  table.title = s.name;
  table.n = data.rows();
  for (std::size_t i = 0; i < s.analyses.size(); ++i) {
    AnalysisRequest request = s.analyses[i];
    if (threads && request.bootstrap) request.bootstrap->threads = *threads;
    ResultRow row;
    row.label = request.label.empty() ? std::string(display_name(request.method)) : request.label;
    row.adjustment = request.adjust;
    try {
      row.estimate = estimate(data, request);
    } catch (const Error& e) {
      row.error = "analysis " + std::to_string(i + 1) + " (" +
                  std::string(to_string(request.method)) + "): " + e.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ResultTable run_scenario(const Scenario& s, std::optional<unsigned> threads) {
  Dataset data = sample(s.model, s.sample_size, s.seed);
  if (s.selection) data = apply_selection(data, *s.selection);
  return run_analyses(s, data, threads);
}

std::optional<Format> parse_format(std::string_view text) {
  if (text == "text") return Format::text;
  if (text == "csv") return Format::csv;
  if (text == "json") return Format::json;
  return std::nullopt;
}

std::string fixed4(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

namespace {

std::string join(const std::vector<std::string>& names, const std::string& sep) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : sep) + n;
  return out;
}

std::string ci_text(const EffectEstimate& e) {
  if (e.ci_method == CiMethod::none) return "-";
  return "(" + fixed4(e.ci_low) + ", " + fixed4(e.ci_high) + ")";
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

ordered_json estimate_json(const EffectEstimate& e) {
  ordered_json j;
  j["method"] = std::string(to_string(e.method));
  j["treatment"] = e.treatment;
  j["outcome"] = e.outcome;
  j["adjustment"] = e.adjustment;
  j["risk_ratio"] = e.risk_ratio;
  if (e.ci_method != CiMethod::none) {
    j["ci_low"] = e.ci_low;
    j["ci_high"] = e.ci_high;
  }
  j["ci_method"] = std::string(to_string(e.ci_method));
  j["n"] = e.n;
  ordered_json diag = ordered_json::object();
  for (const auto& [k, v] : e.diagnostics) diag[k] = v;
  j["diagnostics"] = diag;
  return j;
}

}  // namespace

std::string render_table_text(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], r[c].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += " | ";
      out += cells[c];
      if (c + 1 < cells.size()) out.append(width[c] - std::min(width[c], cells[c].size()), ' ');
    }
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string render(const ResultTable& table, Format format) {
  switch (format) {
    case Format::text: {
      std::vector<std::vector<std::string>> rows;
      std::vector<std::string> errors;
      for (const auto& r : table.rows) {
        std::string adj = r.adjustment.empty() ? "-" : join(r.adjustment, ", ");
        if (r.estimate) {
          rows.push_back({r.label, adj, fixed4(r.estimate->risk_ratio), ci_text(*r.estimate)});
        } else {
          rows.push_back({r.label, adj, "error", "-"});
          errors.push_back(r.error);
        }
      }
      std::string out;
      if (!table.title.empty()) out += table.title + "\n";
      out += "n = " + std::to_string(table.n) + "\n";
      out += render_table_text({"MODEL", "ADJUSTMENT VARIABLE(S)", "RISK RATIO", "CONFIDENCE INTERVAL"},
                               rows);
      for (const auto& e : errors) out += "error: " + e + "\n";
      return out;
    }
    case Format::csv: {
      std::string out = "model,adjustment,risk_ratio,ci_low,ci_high,ci_method,n,error\n";
      for (const auto& r : table.rows) {
        out += csv_cell(r.label) + "," + csv_cell(join(r.adjustment, ";")) + ",";
        if (r.estimate) {
          const auto& e = *r.estimate;
          bool ci = e.ci_method != CiMethod::none;
          out += fixed4(e.risk_ratio) + "," + (ci ? fixed4(e.ci_low) : "") + "," +
                 (ci ? fixed4(e.ci_high) : "") + "," + std::string(to_string(e.ci_method)) + "," +
                 std::to_string(e.n) + ",";
        } else {
          out += ",,,,," + csv_cell(r.error);
        }
        out += "\n";
      }
      return out;
    }
    case Format::json: {
      ordered_json doc;
      doc["title"] = table.title;
      doc["n"] = table.n;
      ordered_json rows = ordered_json::array();
      for (const auto& r : table.rows) {
        ordered_json row;
        row["model"] = r.label;
        row["adjustment"] = r.adjustment;
        if (r.estimate) {
          row["estimate"] = estimate_json(*r.estimate);
        } else {
          row["error"] = r.error;
        }
        rows.push_back(row);
      }
      doc["rows"] = rows;
      return doc.dump(2) + "\n";
    }
  }
  return "";
}

std::string render(const EffectEstimate& e, Format format) {
  switch (format) {
    case Format::text: {
      std::string adj = e.adjustment.empty() ? "-" : join(e.adjustment, ", ");
      return render_table_text(
          {"MODEL", "ADJUSTMENT VARIABLE(S)", "RISK RATIO", "CONFIDENCE INTERVAL"},
          {{std::string(display_name(e.method)), adj, fixed4(e.risk_ratio), ci_text(e)}});
    }
    case Format::csv: {
      bool ci = e.ci_method != CiMethod::none;
      return "method,treatment,outcome,adjustment,risk_ratio,ci_low,ci_high,ci_method,n\n" +
             std::string(to_string(e.method)) + "," + csv_cell(e.treatment) + "," +
             csv_cell(e.outcome) + "," + csv_cell(join(e.adjustment, ";")) + "," +
             fixed4(e.risk_ratio) + "," + (ci ? fixed4(e.ci_low) : "") + "," +
             (ci ? fixed4(e.ci_high) : "") + "," + std::string(to_string(e.ci_method)) + "," +
             std::to_string(e.n) + "\n";
    }
    case Format::json:
      return estimate_json(e).dump(2) + "\n";
  }
  return "";
}

}  // namespace causalkit
