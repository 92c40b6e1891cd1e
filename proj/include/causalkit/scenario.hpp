#pragma once

// Scenario files: a structural model, how much data to draw from it, an
// optional selection, and a list of analyses run against that one dataset.
//
// {
//   "name": "...",                                  optional
//   "nodes": [{"name": "A", "intercept": 0.5, "parents": {"C": 0.2}}, ...],
//   "sample_size": 10000,
//   "seed": 1,
//   "selection": {"node": "P", "value": 1},         optional
//   "roles": {"treatment": "A", "outcome": "B"},    optional
//   "analysis_edges": [["A", "B"]],                 optional
//   "analyses": [{"method": "ipw", "treatment": "A", "outcome": "B",
//                 "adjust": ["C"], "interactions": false, "family": "binomial",
//                 "level": 0.95, "label": "...",
//                 "bootstrap": {"replicates": 200, "seed": 7, "threads": 1}}]
// }
//
// Analysis edges are arrows drawn in the analysis diagram that the model
// deliberately leaves out, e.g. the treatment -> outcome arrow in no-effect
// data. Unknown keys anywhere are rejected.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causalkit/dag.hpp"
#include "causalkit/dataset.hpp"
#include "causalkit/estimators.hpp"
#include "causalkit/scm.hpp"

namespace causalkit {

struct Scenario {
  std::string name;
  StructuralModel model;
  /// Model edges plus analysis edges, with roles.
  CausalDag dag;
  std::vector<Edge> analysis_edges;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;
  std::optional<SelectionRule> selection;
  std::vector<AnalysisRequest> analyses;
  /// Per analysis: true when its bootstrap seed was derived rather than given.
  std::vector<bool> derived_bootstrap_seed;
};

/// Bootstrap seed used when an analysis does not name one.
std::uint64_t derived_bootstrap_seed(std::uint64_t scenario_seed, std::size_t analysis_index);

/// Throws SyntaxError for malformed JSON and SemanticError for schema or
/// consistency problems (missing or unknown keys, unknown columns, invalid
/// model). Bootstrap blocks without a seed get one derived from the scenario
/// seed and the analysis index.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario_file(const std::string& path);

/// Canonical JSON (two-space indent, fixed key order).
std::string scenario_to_json(const Scenario& scenario);
std::string model_to_json(const StructuralModel& model);

/// Rebuilds the diagram from the model, analysis edges and analysis roles and
/// checks every cross-reference. Throws SemanticError.
void finalize_scenario(Scenario& scenario);

/// Changes the sampling seed and re-derives defaulted bootstrap seeds.
void reseed(Scenario& scenario, std::uint64_t seed);

/// Seed precedence: command-line flag, then the environment value, then the
/// file. A malformed environment value throws SemanticError.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env_value,
                           std::uint64_t file_seed);

/// Name of the environment variable consulted by resolve_seed's callers.
inline constexpr const char* kSeedEnvVar = "CAUSALKIT_SEED";

struct ResultRow {
  std::string label;
  std::vector<std::string> adjustment;
  /// Absent when the analysis failed.
  std::optional<EffectEstimate> estimate;
  std::string error;
};

struct ResultTable {
  std::string title;
  /// Rows of the analysed (post-selection) dataset.
  std::size_t n = 0;
  std::vector<ResultRow> rows;
  bool ok() const;
};

/// Samples once, applies the selection, then runs every analysis on that
/// dataset. Failed analyses keep their row with an error annotated by its
/// 1-based index. `threads` overrides the bootstrap thread count when set.
ResultTable run_scenario(const Scenario& scenario, std::optional<unsigned> threads = std::nullopt);

/// The analyses of a scenario against data supplied by the caller.
ResultTable run_analyses(const Scenario& scenario, const Dataset& data,
                         std::optional<unsigned> threads = std::nullopt);

enum class Format { text, csv, json };
std::optional<Format> parse_format(std::string_view text);

/// Text and CSV print risk ratios with four decimals; JSON keeps full
/// precision.
std::string render(const ResultTable& table, Format format);
std::string render(const EffectEstimate& estimate, Format format);

/// Columns padded to a common width and separated by " | ".
std::string render_table_text(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows);

/// "{:.4f}" without locale surprises.
std::string fixed4(double value);

}  // namespace causalkit
