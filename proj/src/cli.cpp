#include "causalkit/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "causalkit/dag.hpp"
#include "causalkit/dag_format.hpp"
#include "causalkit/error.hpp"
#include "causalkit/estimators.hpp"
#include "causalkit/reproduce.hpp"
#include "causalkit/scenario.hpp"
#include "causalkit/scm.hpp"

namespace causalkit {

namespace {

bool is_usage_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError:
    case ErrorCode::SemanticError:
    case ErrorCode::ParseError:
    case ErrorCode::NonBinaryValue:
    case ErrorCode::IoError:
    case ErrorCode::UnknownColumn:
    case ErrorCode::UnknownNode:
    case ErrorCode::InvalidQuery:
    case ErrorCode::InvalidPath:
    case ErrorCode::EndpointConditioned:
      return true;
    default:
      return false;
  }
}

/// Writes to --out when given, otherwise to the console stream.
void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoError, "cannot write '" + out_path + "'");
  file << text;
}

Format format_of(const std::string& name) {
  auto f = parse_format(name);
  if (!f) throw Error(ErrorCode::SemanticError, "unknown format '" + name + "'");
  return *f;
}

std::optional<std::uint64_t> seed_flag(const CLI::Option* opt, std::uint64_t value) {
  if (opt->count() == 0) return std::nullopt;
  return value;
}

/// Loads a scenario and applies --n and the seed precedence.
Scenario prepared_scenario(const std::string& path, std::optional<std::uint64_t> seed,
                           std::size_t n) {
  Scenario s = load_scenario_file(path);
  reseed(s, resolve_seed(seed, std::getenv(kSeedEnvVar), s.seed));
  if (n > 0) s.sample_size = n;
  return s;
}

std::string endpoint(const CausalDag& dag, const std::string& flag, Role role) {
  if (!flag.empty()) return flag;
  auto node = role == Role::treatment ? dag.treatment() : dag.outcome();
  if (!node) {
    throw Error(ErrorCode::InvalidQuery, std::string("no ") + std::string(to_string(role)) +
                                             " declared; pass --" + std::string(to_string(role)));
  }
  return *node;
}

std::string oracle_report(const Scenario& s, Format format) {
  using ordered_json = nlohmann::ordered_json;
  ordered_json rows = ordered_json::array();
  std::vector<std::vector<std::string>> text_rows;
  for (std::size_t i = 0; i < s.analyses.size(); ++i) {
    AnalysisRequest r = s.analyses[i];
    r.bootstrap.reset();
    const std::string label = r.label.empty() ? std::string(display_name(r.method)) : r.label;
    std::string adj;
    for (const auto& a : r.adjust) adj += (adj.empty() ? "" : ", ") + a;
    double value = population_estimand(s.model, r, s.selection);
    rows.push_back({{"model", label}, {"adjustment", r.adjust}, {"population_estimand", value}});
    text_rows.push_back({label, adj.empty() ? "-" : adj, fixed4(value)});
  }
  std::optional<double> true_rr;
  if (auto t = s.dag.treatment(), o = s.dag.outcome(); t && o) {
    true_rr = population_risk_ratio(s.model, *t, *o, s.selection);
  }
  switch (format) {
    case Format::text: {
      std::string out;
      if (!s.name.empty()) out += s.name + "\n";
      if (true_rr) {
        out += "population risk ratio " + *s.dag.treatment() + " -> " + *s.dag.outcome() + ": " +
               fixed4(*true_rr) + "\n";
      }
      return out + render_table_text({"MODEL", "ADJUSTMENT VARIABLE(S)", "POPULATION ESTIMAND"},
                                     text_rows);
    }
    case Format::csv: {
      std::string out = "model,adjustment,population_estimand\n";
      for (const auto& r : rows) {
        std::string adj;
        for (const auto& a : r["adjustment"]) adj += (adj.empty() ? "" : ";") + a.get<std::string>();
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10f", r["population_estimand"].get<double>());
        out += r["model"].get<std::string>() + "," + adj + "," + buf + "\n";
      }
      return out;
    }
    case Format::json: {
      ordered_json doc;
      doc["name"] = s.name;
      if (true_rr) doc["population_risk_ratio"] = *true_rr;
      doc["analyses"] = rows;
      return doc.dump(2) + "\n";
    }
  }
  return "";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal diagrams, simulation and risk-ratio estimation for binary data",
               "causalkit"};
  app.require_subcommand(1);
  std::string format_name = "text";
  std::string out_path;

  // dag
  auto* dag_cmd = app.add_subcommand("dag", "Query a causal diagram file");
  dag_cmd->require_subcommand(1);
  std::string dag_path;
  auto* check_cmd = dag_cmd->add_subcommand("check", "Validate a diagram and summarise it");
  check_cmd->add_option("file", dag_path, "Diagram file")->required();

  std::string from, to;
  std::vector<std::string> given;
  auto* paths_cmd =
      dag_cmd->add_subcommand("paths", "List every path between two nodes with its status");
  paths_cmd->add_option("file", dag_path, "Diagram file")->required();
  paths_cmd->add_option("--from", from, "Start node (default: treatment)");
  paths_cmd->add_option("--to", to, "End node (default: outcome)");
  paths_cmd->add_option("--given", given, "Conditioning set");

  std::vector<std::string> forced;
  auto* adjust_cmd = dag_cmd->add_subcommand("adjust", "Minimal adjustment sets");
  adjust_cmd->add_option("file", dag_path, "Diagram file")->required();
  adjust_cmd->add_option("--treatment", from, "Treatment (default: declared)");
  adjust_cmd->add_option("--outcome", to, "Outcome (default: declared)");
  adjust_cmd->add_option("--forced", forced,
                         "Nodes already conditioned on, in addition to declared ones");

  // scenario commands
  std::string scenario_path;
  std::uint64_t seed_value = 0;
  std::size_t n_value = 0;
  unsigned threads = 1;

  auto* simulate_cmd = app.add_subcommand("simulate", "Sample a scenario's model to CSV");
  simulate_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  auto* simulate_seed = simulate_cmd->add_option("--seed", seed_value, "Sample seed");
  simulate_cmd->add_option("--n", n_value, "Sample size");
  bool no_selection = false;
  simulate_cmd->add_flag("--no-selection", no_selection, "Keep rows outside the selection");
  simulate_cmd->add_option("--out", out_path, "Output path (default: stdout)");

  auto* run_cmd = app.add_subcommand("run", "Sample a scenario once and run its analyses");
  run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  auto* run_seed = run_cmd->add_option("--seed", seed_value, "Sample seed");
  run_cmd->add_option("--n", n_value, "Sample size");
  run_cmd->add_option("--threads", threads, "Bootstrap threads (0: all cores)");
  run_cmd->add_option("--format", format_name, "text, csv or json");
  run_cmd->add_option("--out", out_path, "Output path (default: stdout)");

  bool export_population = false;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "Exact population values of a scenario's analyses");
  oracle_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  oracle_cmd->add_flag("--population", export_population,
                       "Write the weighted joint distribution as CSV instead");
  oracle_cmd->add_option("--format", format_name, "text, csv or json");
  oracle_cmd->add_option("--out", out_path, "Output path (default: stdout)");

  // estimate
  std::string data_path, method_name, family_name = "binomial";
  std::vector<std::string> adjust;
  bool interactions = false;
  std::size_t replicates = 0;
  std::uint64_t bootstrap_seed = 0;
  double level = 0.95;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate a risk ratio from a CSV file");
  estimate_cmd->add_option("--data", data_path, "CSV with 0/1 columns")->required();
  estimate_cmd->add_option("--method", method_name,
                           "unadjusted, outcome_regression, g_computation or ipw")
      ->required();
  estimate_cmd->add_option("--treatment", from, "Treatment column")->required();
  estimate_cmd->add_option("--outcome", to, "Outcome column")->required();
  estimate_cmd->add_option("--adjust", adjust, "Adjustment columns");
  estimate_cmd->add_option("--family", family_name, "binomial or poisson (log-link models)");
  estimate_cmd->add_flag("--interactions", interactions,
                         "Treatment-by-adjuster terms in the G-computation model");
  estimate_cmd->add_option("--bootstrap", replicates, "Bootstrap replicates (0: none)");
  estimate_cmd->add_option("--bootstrap-seed", bootstrap_seed, "Bootstrap seed");
  estimate_cmd->add_option("--level", level, "Confidence level");
  estimate_cmd->add_option("--threads", threads, "Bootstrap threads (0: all cores)");
  estimate_cmd->add_option("--format", format_name, "text, csv or json");
  estimate_cmd->add_option("--out", out_path, "Output path (default: stdout)");

  // reproduce
  std::string target_name;
  auto* reproduce_cmd =
      app.add_subcommand("reproduce", "Re-run a published table and check it against its bands");
  reproduce_cmd->add_option("target", target_name, "table2 ... table8 or all")->required();
  auto* reproduce_seed = reproduce_cmd->add_option("--seed", seed_value, "Sample seed");
  reproduce_cmd->add_option("--threads", threads, "Bootstrap threads (0: all cores)");
  reproduce_cmd->add_option("--format", format_name, "text, csv or json");
  reproduce_cmd->add_option("--out", out_path, "Output path (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*dag_cmd) {
      CausalDag dag = load_dag_file(dag_path);
      if (*check_cmd) {
        out << "ok: " << dag.nodes.size() << " nodes, " << dag.edges.size() << " edges\n";
        for (Role role : {Role::treatment, Role::outcome, Role::conditioned, Role::latent}) {
          auto nodes = dag.nodes_with_role(role);
          if (!nodes.empty()) out << to_string(role) << ": " << format_node_set(nodes) << "\n";
        }
        return kExitOk;
      }
      if (*paths_cmd) {
        std::string x = endpoint(dag, from, Role::treatment);
        std::string y = endpoint(dag, to, Role::outcome);
        NodeSet z(given.begin(), given.end());
        for (const auto& node : z) {
          if (!dag.has_node(node)) throw Error(ErrorCode::UnknownNode, "unknown node '" + node + "'");
        }
        auto paths = enumerate_paths(dag, x, y);
        for (const auto& p : paths) {
          out << p.to_string() << "  " << (path_open(dag, p, z) ? "OPEN" : "CLOSED");
          for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) {
            out << "  " << p.nodes[i] << ":" << to_string(p.kind(i));
          }
          out << "\n";
        }
        out << paths.size() << (paths.size() == 1 ? " path; " : " paths; ")
            << (d_separated(dag, x, y, z) ? "d-separated" : "d-connected") << " given "
            << format_node_set(z) << "\n";
        return kExitOk;
      }
      if (*adjust_cmd) {
        std::string t = endpoint(dag, from, Role::treatment);
        std::string o = endpoint(dag, to, Role::outcome);
        NodeSet f = dag.nodes_with_role(Role::conditioned);
        f.insert(forced.begin(), forced.end());
        auto sets = minimal_adjustment_sets(dag, make_adjustment_query(dag, t, o, f));
        if (sets.empty()) {
          out << "no valid adjustment set\n";
          return kExitAnalysisFailure;
        }
        for (const auto& s : sets) out << format_node_set(s) << "\n";
        return kExitOk;
      }
    }

    if (*simulate_cmd) {
      Scenario s = prepared_scenario(scenario_path, seed_flag(simulate_seed, seed_value), n_value);
      Dataset data = sample(s.model, s.sample_size, s.seed);
      if (s.selection && !no_selection) data = apply_selection(data, *s.selection);
      emit(to_csv(data), out_path, out);
      return kExitOk;
    }

    if (*run_cmd) {
      Format format = format_of(format_name);
      Scenario s = prepared_scenario(scenario_path, seed_flag(run_seed, seed_value), n_value);
      ResultTable table = run_scenario(s, threads);
      emit(render(table, format), out_path, out);
      for (const auto& row : table.rows) {
        if (!row.estimate) err << "error: " << row.error << "\n";
      }
      return table.ok() ? kExitOk : kExitAnalysisFailure;
    }

    if (*oracle_cmd) {
      Scenario s = load_scenario_file(scenario_path);
      if (export_population) {
        emit(to_csv(enumerate_population(s.model, s.selection)), out_path, out);
      } else {
        emit(oracle_report(s, format_of(format_name)), out_path, out);
      }
      return kExitOk;
    }

    if (*estimate_cmd) {
      Format format = format_of(format_name);
      AnalysisRequest r;
      auto method = parse_method(method_name);
      if (!method) throw Error(ErrorCode::SemanticError, "unknown method '" + method_name + "'");
      r.method = *method;
      r.treatment = from;
      r.outcome = to;
      r.adjust = adjust;
      r.interactions = interactions;
      r.level = level;
      if (family_name == "binomial") {
        r.family = Family::binomial;
      } else if (family_name == "poisson") {
        r.family = Family::poisson;
      } else {
        throw Error(ErrorCode::SemanticError, "unknown family '" + family_name + "'");
      }
      if (replicates > 0) r.bootstrap = BootstrapSpec{replicates, bootstrap_seed, level, threads};
      Dataset data = read_csv_file(data_path);
      for (const auto& name : std::vector<std::string>{from, to}) {
        if (!data.has_column(name)) {
          throw Error(ErrorCode::UnknownColumn, "no column named '" + name + "'");
        }
      }
      for (const auto& name : adjust) {
        if (!data.has_column(name)) {
          throw Error(ErrorCode::UnknownColumn, "no column named '" + name + "'");
        }
      }
      emit(render(estimate(data, r), format), out_path, out);
      return kExitOk;
    }

    if (*reproduce_cmd) {
      Format format = format_of(format_name);
      std::vector<Target> targets;
      if (target_name == "all") {
        targets = all_targets();
      } else if (auto t = parse_target(target_name)) {
        targets = {*t};
      } else {
        throw Error(ErrorCode::SemanticError,
                    "unknown target '" + target_name + "' (table2 ... table8 or all)");
      }
      ReproOptions options;
      // Each target keeps its own default seed unless a flag or the
      // environment names one.
      const char* env = std::getenv(kSeedEnvVar);
      if (reproduce_seed->count() > 0 || (env && *env)) {
        options.seed = resolve_seed(seed_flag(reproduce_seed, seed_value), env, 0);
      }
      options.threads = threads;
      std::vector<Reproduction> results;
      for (Target t : targets) results.push_back(reproduce(t, options));
      emit(render(results, format), out_path, out);
      bool pass = std::all_of(results.begin(), results.end(),
                              [](const Reproduction& r) { return r.pass(); });
      return pass ? kExitOk : kExitAnalysisFailure;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_usage_error(e.code()) ? kExitUsage : kExitAnalysisFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitAnalysisFailure;
  }
  return kExitUsage;
}

}  // namespace causalkit
