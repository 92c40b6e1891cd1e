#pragma once

// Binary structural causal models. Each node is Bernoulli with a success
// probability that is linear in its (0/1) parents:
//
//   P(node = 1 | parents) = intercept + sum_j coef_j * parent_j

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalkit/dag.hpp"
#include "causalkit/dataset.hpp"

namespace causalkit {

struct Equation {
  std::string node;
  double intercept = 0.0;
  std::map<std::string, double> parents;

  bool operator==(const Equation&) const = default;
};

/// Equations in a topological order (parents before children).
struct StructuralModel {
  std::vector<Equation> equations;

  std::vector<std::string> node_names() const;
  const Equation& equation(const std::string& node) const;
  bool has_node(const std::string& node) const;

  bool operator==(const StructuralModel&) const = default;
};

/// Throws Error(ProbabilityOutOfRange | ParentOrderViolation | UnknownParent |
/// DuplicateNode). An out-of-range error names the node and the parent
/// configuration that breaks [0, 1].
void validate_model(const StructuralModel& model);

/// The parent graph of the model (edges parent -> child in equation order).
CausalDag model_dag(const StructuralModel& model);

/// n rows drawn in row order. Row i uses a SplitMix64 stream seeded with
/// mix(seed, i) and takes one uniform per node in declared order; a node is
/// 1 iff its uniform is below its success probability. Rows are therefore
/// independent of how the range is split across threads.
Dataset sample(const StructuralModel& model, std::size_t n, std::uint64_t seed);

/// Rows [first, first + count) of `sample(model, n, seed)` for any n above
/// first + count.
Dataset sample_rows(const StructuralModel& model, std::size_t first, std::size_t count,
                    std::uint64_t seed);

/// Every joint configuration, first node as the most significant bit, weighted
/// by its exact probability. With a selection, non-matching rows are dropped
/// and weights renormalised. Throws TooManyNodes above 24 nodes and
/// EmptySelection when the selected event has probability zero.
Dataset enumerate_population(const StructuralModel& model,
                             const std::optional<SelectionRule>& selection = std::nullopt);

/// P(outcome = 1 | treatment = 1) / P(outcome = 1 | treatment = 0), exactly.
double population_risk_ratio(const StructuralModel& model, const std::string& treatment,
                             const std::string& outcome,
                             const std::optional<SelectionRule>& selection = std::nullopt);

/// Weighted mean of every column, in column order.
std::vector<double> column_means(const Dataset& data);

}  // namespace causalkit
