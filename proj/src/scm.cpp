#include "causalkit/scm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "causalkit/error.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {

namespace {

// Rounding slack when checking probabilities built from decimal literals.
constexpr double kProbabilitySlack = 1e-12;

struct CompiledNode {
  double intercept;
  std::vector<std::pair<std::size_t, double>> parents;  // (column, coef)
};

std::vector<CompiledNode> compile(const StructuralModel& model) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<CompiledNode> out;
  for (const auto& eq : model.equations) {
    CompiledNode node{eq.intercept, {}};
    for (const auto& [parent, coef] : eq.parents) node.parents.emplace_back(index.at(parent), coef);
    index[eq.node] = out.size();
    out.push_back(std::move(node));
  }
  return out;
}

template <typename Values>
double success_probability(const CompiledNode& node, const Values& values) {
  double p = node.intercept;
  for (const auto& [col, coef] : node.parents) p += coef * values[col];
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

std::vector<std::string> StructuralModel::node_names() const {
  std::vector<std::string> out;
  out.reserve(equations.size());
  for (const auto& eq : equations) out.push_back(eq.node);
  return out;
}

const Equation& StructuralModel::equation(const std::string& node) const {
  for (const auto& eq : equations) {
    if (eq.node == node) return eq;
  }
  throw Error(ErrorCode::UnknownNode, "model has no node '" + node + "'");
}

bool StructuralModel::has_node(const std::string& node) const {
  return std::any_of(equations.begin(), equations.end(),
                     [&](const Equation& eq) { return eq.node == node; });
}

void validate_model(const StructuralModel& model) {
  std::set<std::string> declared;
  for (const auto& eq : model.equations) {
    if (declared.count(eq.node)) {
      throw Error(ErrorCode::DuplicateNode, "node '" + eq.node + "' has two equations", 0,
                  {eq.node});
    }
    std::vector<std::pair<std::string, double>> parents(eq.parents.begin(), eq.parents.end());
    for (const auto& [parent, coef] : parents) {
      if (parent == eq.node) {
        throw Error(ErrorCode::ParentOrderViolation, "node '" + eq.node + "' is its own parent",
                    0, {eq.node});
      }
      if (!declared.count(parent)) {
        bool later = model.has_node(parent);
        throw Error(later ? ErrorCode::ParentOrderViolation : ErrorCode::UnknownParent,
                    later ? "parent '" + parent + "' of '" + eq.node + "' is declared after it"
                          : "node '" + eq.node + "' has unknown parent '" + parent + "'",
                    0, {eq.node, parent});
      }
      if (!std::isfinite(coef)) {
        throw Error(ErrorCode::ProbabilityOutOfRange,
                    "non-finite coefficient on '" + parent + "' for '" + eq.node + "'", 0,
                    {eq.node});
      }
    }
    if (parents.size() > 24) {
      throw Error(ErrorCode::TooManyNodes, "node '" + eq.node + "' has too many parents");
    }
    for (std::uint32_t config = 0; config < (1u << parents.size()); ++config) {
      double p = eq.intercept;
      for (std::size_t j = 0; j < parents.size(); ++j) {
        if (config & (1u << j)) p += parents[j].second;
      }
      if (!(p >= -kProbabilitySlack && p <= 1.0 + kProbabilitySlack)) {
        std::string text;
        for (std::size_t j = 0; j < parents.size(); ++j) {
          text += (j ? ", " : "") + parents[j].first + "=" + ((config >> j) & 1u ? "1" : "0");
        }
        throw Error(ErrorCode::ProbabilityOutOfRange,
                    "P(" + eq.node + " = 1" + (text.empty() ? "" : " | " + text) +
                        ") = " + std::to_string(p) + " is outside [0, 1]",
                    0, {eq.node});
      }
    }
    declared.insert(eq.node);
  }
}

CausalDag model_dag(const StructuralModel& model) {
  CausalDag dag;
  for (const auto& eq : model.equations) dag.add_node(eq.node);
  for (const auto& eq : model.equations) {
    for (const auto& [parent, coef] : eq.parents) dag.add_edge(parent, eq.node);
  }
  return dag;
}

Dataset sample_rows(const StructuralModel& model, std::size_t first, std::size_t count,
                    std::uint64_t seed) {
  try {
    validate_model(model);
  } catch (const Error& e) {
    throw Error(ErrorCode::ModelInvalid, e.what(), 0, e.nodes());
  }
  auto nodes = compile(model);
  const std::size_t k = nodes.size();
  std::vector<std::vector<std::uint8_t>> data(k, std::vector<std::uint8_t>(count));
  std::vector<std::uint8_t> row(k);
  for (std::size_t r = 0; r < count; ++r) {
    SplitMix64 stream(mix(seed, first + r));
    for (std::size_t j = 0; j < k; ++j) {
      double p = success_probability(nodes[j], row);
      row[j] = stream.uniform() < p ? 1 : 0;
      data[j][r] = row[j];
    }
  }
  return Dataset(model.node_names(), std::move(data));
}

Dataset sample(const StructuralModel& model, std::size_t n, std::uint64_t seed) {
  return sample_rows(model, 0, n, seed);
}

Dataset enumerate_population(const StructuralModel& model,
                             const std::optional<SelectionRule>& selection) {
  validate_model(model);
  const std::size_t k = model.equations.size();
  if (k > 24) {
    throw Error(ErrorCode::TooManyNodes,
                "population enumeration needs 2^" + std::to_string(k) + " rows (limit 2^24)");
  }
  std::optional<std::size_t> selected;
  if (selection) {
    auto names = model.node_names();
    auto it = std::find(names.begin(), names.end(), selection->node);
    if (it == names.end()) {
      throw Error(ErrorCode::UnknownColumn, "selection node '" + selection->node + "' not in model");
    }
    selected = static_cast<std::size_t>(it - names.begin());
  }
  auto nodes = compile(model);
  const std::size_t total = std::size_t{1} << k;
  std::vector<std::vector<std::uint8_t>> data(k);
  std::vector<double> weights;
  std::vector<std::uint8_t> row(k);
  for (std::size_t config = 0; config < total; ++config) {
    for (std::size_t j = 0; j < k; ++j) row[j] = (config >> (k - 1 - j)) & 1u;
    if (selected && row[*selected] != selection->value) continue;
    double w = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      double p = success_probability(nodes[j], row);
      w *= row[j] ? p : 1.0 - p;
    }
    for (std::size_t j = 0; j < k; ++j) data[j].push_back(row[j]);
    weights.push_back(w);
  }
  double mass = 0.0;
  for (double w : weights) mass += w;
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::EmptySelection,
                "selection " + (selection ? selection->node : std::string()) + " = " +
                    std::to_string(selection ? selection->value : 0) + " has probability zero");
  }
  if (selected) {
    for (double& w : weights) w /= mass;
  }
  return Dataset(model.node_names(), std::move(data), std::move(weights));
}

double population_risk_ratio(const StructuralModel& model, const std::string& treatment,
                             const std::string& outcome,
                             const std::optional<SelectionRule>& selection) {
  auto pop = enumerate_population(model, selection);
  auto a = pop.column(treatment);
  auto y = pop.column(outcome);
  double treated = 0, treated_events = 0, control = 0, control_events = 0;
  for (std::size_t r = 0; r < pop.rows(); ++r) {
    double w = pop.weight(r);
    if (a[r]) {
      treated += w;
      treated_events += w * y[r];
    } else {
      control += w;
      control_events += w * y[r];
    }
  }
  if (!(treated > 0) || !(control > 0)) {
    throw Error(ErrorCode::DegenerateTreatment,
                "treatment '" + treatment + "' has an arm with probability zero");
  }
  if (!(control_events > 0)) {
    throw Error(ErrorCode::DegenerateTreatment, "outcome has probability zero among controls");
  }
  return (treated_events / treated) / (control_events / control);
}

std::vector<double> column_means(const Dataset& data) {
  std::vector<double> out(data.cols(), 0.0);
  const double total = data.total_weight();
  for (std::size_t c = 0; c < data.cols(); ++c) {
    auto col = data.column(c);
    double sum = 0;
    for (std::size_t r = 0; r < data.rows(); ++r) sum += data.weight(r) * col[r];
    out[c] = total > 0 ? sum / total : 0.0;
  }
  return out;
}

}  // namespace causalkit
