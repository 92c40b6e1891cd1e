#pragma once

// Causal diagrams: directed acyclic graphs over named variables, with the
// path-blocking rules used to decide which adjustment sets remove bias.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace causalkit {

using NodeSet = std::set<std::string>;

enum class Role { plain, treatment, outcome, conditioned, latent };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

struct Edge {
  std::string parent;
  std::string child;

  auto operator<=>(const Edge&) const = default;
};

/// A causal diagram. This is a plain value: it can hold an invalid graph, and
/// `validate` is the gate every analysis goes through.
struct CausalDag {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  std::map<std::string, Role> roles;

  /// Appends `name` unless it is already declared.
  void add_node(const std::string& name);
  /// Appends the edge, declaring missing endpoints first.
  void add_edge(const std::string& parent, const std::string& child);
  void set_role(const std::string& name, Role role);

  bool has_node(std::string_view name) const;
  bool has_edge(std::string_view parent, std::string_view child) const;
  Role role_of(std::string_view name) const;
  std::optional<std::string> treatment() const;
  std::optional<std::string> outcome() const;
  NodeSet nodes_with_role(Role role) const;

  bool operator==(const CausalDag&) const = default;
};

/// Throws Error (CycleDetected, DuplicateNode, DuplicateEdge,
/// UnknownEdgeEndpoint, SelfLoop, RoleConflict) naming the first violated
/// invariant. A cycle error carries its node sequence in `Error::nodes()`.
void validate(const CausalDag& dag);

/// Nodes in a topological order, ties broken by declaration order.
std::vector<std::string> topological_order(const CausalDag& dag);

NodeSet parents(const CausalDag& dag, const std::string& node);
NodeSet children(const CausalDag& dag, const std::string& node);
/// Strict descendants (the node itself is not included).
NodeSet descendants(const CausalDag& dag, const std::string& node);
/// Strict ancestors.
NodeSet ancestors(const CausalDag& dag, const std::string& node);

enum class Direction { forward, backward };
enum class NodeKind { chain, fork, collider };

std::string_view to_string(NodeKind kind);

/// A simple path v0 ... vk. `steps[i]` is the orientation of the edge between
/// nodes[i] and nodes[i + 1] as seen walking from v0: forward means
/// nodes[i] -> nodes[i + 1].
struct Path {
  std::vector<std::string> nodes;
  std::vector<Direction> steps;

  /// Classification of interior node `nodes[i]`, 0 < i < nodes.size() - 1.
  NodeKind kind(std::size_t i) const;
  /// Every edge points away from the start: a directed causal path.
  bool is_directed() const;
  /// First step goes against an arrow into the start node.
  bool is_backdoor() const;
  Path reversed() const;
  /// e.g. "childcare <- conduct_entry -> conduct_school".
  std::string to_string() const;

  auto operator<=>(const Path&) const = default;
};

/// Every simple path between x and y, ordered lexicographically by node
/// sequence.
std::vector<Path> enumerate_paths(const CausalDag& dag, const std::string& x,
                                  const std::string& y);

/// Chain and fork nodes are open iff not in `z`; a collider is open iff it or
/// one of its descendants is in `z`.
bool path_open(const CausalDag& dag, const Path& path, const NodeSet& z);

/// Reachability (Bayes-ball) test: no active trail from x to y given z.
bool d_separated(const CausalDag& dag, const std::string& x,
                 const std::string& y, const NodeSet& z);

/// Same question answered by enumerating every path and testing each one.
bool d_separated_by_paths(const CausalDag& dag, const std::string& x,
                          const std::string& y, const NodeSet& z);

std::vector<Path> backdoor_paths(const CausalDag& dag,
                                 const std::string& treatment,
                                 const std::string& outcome);

struct AdjustmentQuery {
  std::string treatment;
  std::string outcome;
  /// Nodes the data already conditions on (sample selection).
  NodeSet forced;
  /// Observable nodes the analyst may adjust for.
  NodeSet candidates;
};

/// Query whose candidates are every non-latent node that is neither an
/// endpoint, forced, nor a descendant of the treatment.
AdjustmentQuery make_adjustment_query(const CausalDag& dag,
                                      const std::string& treatment,
                                      const std::string& outcome,
                                      const NodeSet& forced = {});

/// z is valid iff it holds no descendant of the treatment, closes every
/// non-directed treatment-outcome path and leaves every directed one open,
/// both judged under z together with the forced nodes.
bool is_valid_adjustment(const CausalDag& dag, const AdjustmentQuery& query,
                         const NodeSet& z);

/// All inclusion-minimal valid subsets of the candidates, by size and then
/// lexicographically. Empty when nothing works.
std::vector<NodeSet> minimal_adjustment_sets(const CausalDag& dag,
                                             const AdjustmentQuery& query);

std::string format_node_set(const NodeSet& set);

}  // namespace causalkit
