#include "causalkit/dag.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>

#include "causalkit/error.hpp"

namespace causalkit {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::plain: return "plain";
    case Role::treatment: return "treatment";
    case Role::outcome: return "outcome";
    case Role::conditioned: return "conditioned";
    case Role::latent: return "latent";
  }
  return "plain";
}

std::optional<Role> parse_role(std::string_view text) {
  for (Role r : {Role::plain, Role::treatment, Role::outcome, Role::conditioned,
                 Role::latent}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::chain: return "chain";
    case NodeKind::fork: return "fork";
    case NodeKind::collider: return "collider";
  }
  return "chain";
}

void CausalDag::add_node(const std::string& name) {
  if (!has_node(name)) nodes.push_back(name);
}

void CausalDag::add_edge(const std::string& parent, const std::string& child) {
  add_node(parent);
  add_node(child);
  edges.push_back({parent, child});
}

void CausalDag::set_role(const std::string& name, Role role) {
  add_node(name);
  if (role == Role::plain) {
    roles.erase(name);
  } else {
    roles[name] = role;
  }
}

bool CausalDag::has_node(std::string_view name) const {
  return std::find(nodes.begin(), nodes.end(), name) != nodes.end();
}

bool CausalDag::has_edge(std::string_view parent, std::string_view child) const {
  return std::any_of(edges.begin(), edges.end(), [&](const Edge& e) {
    return e.parent == parent && e.child == child;
  });
}

Role CausalDag::role_of(std::string_view name) const {
  auto it = roles.find(std::string(name));
  return it == roles.end() ? Role::plain : it->second;
}

std::optional<std::string> CausalDag::treatment() const {
  for (const auto& [name, role] : roles) {
    if (role == Role::treatment) return name;
  }
  return std::nullopt;
}

std::optional<std::string> CausalDag::outcome() const {
  for (const auto& [name, role] : roles) {
    if (role == Role::outcome) return name;
  }
  return std::nullopt;
}

NodeSet CausalDag::nodes_with_role(Role role) const {
  NodeSet out;
  for (const auto& [name, r] : roles) {
    if (r == role) out.insert(name);
  }
  return out;
}

namespace {

// Integer adjacency view of a dag. Built per call; graphs here are small.
struct Index {
  std::vector<std::string> names;
  std::unordered_map<std::string, int> ids;
  std::vector<std::vector<int>> parents;
  std::vector<std::vector<int>> children;

  explicit Index(const CausalDag& dag) : names(dag.nodes) {
    for (int i = 0; i < static_cast<int>(names.size()); ++i) ids[names[i]] = i;
    parents.resize(names.size());
    children.resize(names.size());
    for (const auto& e : dag.edges) {
      int p = require(e.parent);
      int c = require(e.child);
      children[p].push_back(c);
      parents[c].push_back(p);
    }
  }

  int require(const std::string& name) const {
    auto it = ids.find(name);
    if (it == ids.end()) {
      throw Error(ErrorCode::UnknownNode, "node '" + name + "' is not in the graph");
    }
    return it->second;
  }

  std::vector<bool> descendant_mask(int start) const {
    std::vector<bool> seen(names.size(), false);
    std::vector<int> stack{start};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int c : children[v]) {
        if (!seen[c]) {
          seen[c] = true;
          stack.push_back(c);
        }
      }
    }
    return seen;
  }

  std::vector<bool> mask(const NodeSet& set) const {
    std::vector<bool> m(names.size(), false);
    for (const auto& n : set) m[require(n)] = true;
    return m;
  }
};

bool path_open_indexed(const Index& idx, const Path& path,
                       const std::vector<bool>& in_z) {
  for (std::size_t i = 1; i + 1 < path.nodes.size(); ++i) {
    int v = idx.require(path.nodes[i]);
    if (path.kind(i) == NodeKind::collider) {
      bool activated = in_z[v];
      if (!activated) {
        auto desc = idx.descendant_mask(v);
        for (std::size_t d = 0; d < desc.size() && !activated; ++d) {
          activated = desc[d] && in_z[d];
        }
      }
      if (!activated) return false;
    } else if (in_z[v]) {
      return false;
    }
  }
  return true;
}

void check_endpoints(const std::string& x, const std::string& y) {
  if (x == y) {
    throw Error(ErrorCode::InvalidQuery, "path endpoints must differ ('" + x + "')");
  }
}

}  // namespace

void validate(const CausalDag& dag) {
  NodeSet seen;
  for (const auto& n : dag.nodes) {
    if (!seen.insert(n).second) {
      throw Error(ErrorCode::DuplicateNode, "node '" + n + "' declared twice", 0, {n});
    }
  }
  std::set<Edge> edges;
  for (const auto& e : dag.edges) {
    for (const auto* end : {&e.parent, &e.child}) {
      if (!seen.count(*end)) {
        throw Error(ErrorCode::UnknownEdgeEndpoint,
                    "edge " + e.parent + " -> " + e.child + " uses undeclared node '" +
                        *end + "'",
                    0, {*end});
      }
    }
    if (e.parent == e.child) {
      throw Error(ErrorCode::SelfLoop, "self-loop on '" + e.parent + "'", 0, {e.parent});
    }
    if (!edges.insert(e).second) {
      throw Error(ErrorCode::DuplicateEdge,
                  "edge " + e.parent + " -> " + e.child + " declared twice", 0,
                  {e.parent, e.child});
    }
  }
  int treatments = 0;
  int outcomes = 0;
  for (const auto& [name, role] : dag.roles) {
    if (!seen.count(name)) {
      throw Error(ErrorCode::UnknownNode, "role assigned to undeclared node '" + name + "'",
                  0, {name});
    }
    treatments += role == Role::treatment;
    outcomes += role == Role::outcome;
  }
  if (treatments > 1) {
    throw Error(ErrorCode::RoleConflict, "more than one treatment node");
  }
  if (outcomes > 1) {
    throw Error(ErrorCode::RoleConflict, "more than one outcome node");
  }

  Index idx(dag);
  enum class Mark { white, grey, black };
  std::vector<Mark> mark(idx.names.size(), Mark::white);
  std::vector<int> stack;
  std::function<void(int)> visit = [&](int v) {
    mark[v] = Mark::grey;
    stack.push_back(v);
    for (int c : idx.children[v]) {
      if (mark[c] == Mark::grey) {
        auto first = std::find(stack.begin(), stack.end(), c);
        std::vector<std::string> cycle;
        for (auto it = first; it != stack.end(); ++it) cycle.push_back(idx.names[*it]);
        std::string text;
        for (const auto& n : cycle) text += n + " -> ";
        throw Error(ErrorCode::CycleDetected, "cycle " + text + cycle.front(), 0, cycle);
      }
      if (mark[c] == Mark::white) visit(c);
    }
    stack.pop_back();
    mark[v] = Mark::black;
  };
  for (int v = 0; v < static_cast<int>(idx.names.size()); ++v) {
    if (mark[v] == Mark::white) visit(v);
  }
}

std::vector<std::string> topological_order(const CausalDag& dag) {
  Index idx(dag);
  std::vector<int> indegree(idx.names.size());
  for (std::size_t v = 0; v < idx.names.size(); ++v) {
    indegree[v] = static_cast<int>(idx.parents[v].size());
  }
  std::vector<std::string> order;
  std::vector<bool> done(idx.names.size(), false);
  // Repeatedly take the earliest-declared ready node.
  while (order.size() < idx.names.size()) {
    bool progressed = false;
    for (std::size_t v = 0; v < idx.names.size(); ++v) {
      if (done[v] || indegree[v] != 0) continue;
      done[v] = true;
      order.push_back(idx.names[v]);
      for (int c : idx.children[v]) --indegree[c];
      progressed = true;
      break;
    }
    if (!progressed) throw Error(ErrorCode::CycleDetected, "graph has a cycle");
  }
  return order;
}

NodeSet parents(const CausalDag& dag, const std::string& node) {
  Index idx(dag);
  NodeSet out;
  for (int p : idx.parents[idx.require(node)]) out.insert(idx.names[p]);
  return out;
}

NodeSet children(const CausalDag& dag, const std::string& node) {
  Index idx(dag);
  NodeSet out;
  for (int c : idx.children[idx.require(node)]) out.insert(idx.names[c]);
  return out;
}

NodeSet descendants(const CausalDag& dag, const std::string& node) {
  Index idx(dag);
  auto mask = idx.descendant_mask(idx.require(node));
  NodeSet out;
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (mask[v]) out.insert(idx.names[v]);
  }
  return out;
}

NodeSet ancestors(const CausalDag& dag, const std::string& node) {
  Index idx(dag);
  std::vector<bool> seen(idx.names.size(), false);
  std::vector<int> stack{idx.require(node)};
  NodeSet out;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int p : idx.parents[v]) {
      if (!seen[p]) {
        seen[p] = true;
        out.insert(idx.names[p]);
        stack.push_back(p);
      }
    }
  }
  return out;
}

NodeKind Path::kind(std::size_t i) const {
  Direction in = steps.at(i - 1);
  Direction out = steps.at(i);
  if (in == Direction::forward && out == Direction::backward) return NodeKind::collider;
  if (in == Direction::backward && out == Direction::forward) return NodeKind::fork;
  return NodeKind::chain;
}

bool Path::is_directed() const {
  return std::all_of(steps.begin(), steps.end(),
                     [](Direction d) { return d == Direction::forward; });
}

bool Path::is_backdoor() const {
  return !steps.empty() && steps.front() == Direction::backward;
}

Path Path::reversed() const {
  Path r;
  r.nodes.assign(nodes.rbegin(), nodes.rend());
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    r.steps.push_back(*it == Direction::forward ? Direction::backward : Direction::forward);
  }
  return r;
}

std::string Path::to_string() const {
  std::string out = nodes.empty() ? "" : nodes.front();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out += steps[i] == Direction::forward ? " -> " : " <- ";
    out += nodes[i + 1];
  }
  return out;
}

std::vector<Path> enumerate_paths(const CausalDag& dag, const std::string& x,
                                  const std::string& y) {
  check_endpoints(x, y);
  Index idx(dag);
  const int source = idx.require(x);
  const int target = idx.require(y);

  std::vector<Path> out;
  std::vector<bool> on_path(idx.names.size(), false);
  Path current;
  current.nodes.push_back(x);
  on_path[source] = true;

  std::function<void(int)> extend = [&](int v) {
    auto step = [&](int next, Direction dir) {
      if (on_path[next]) return;
      current.nodes.push_back(idx.names[next]);
      current.steps.push_back(dir);
      if (next == target) {
        out.push_back(current);
      } else {
        on_path[next] = true;
        extend(next);
        on_path[next] = false;
      }
      current.nodes.pop_back();
      current.steps.pop_back();
    };
    for (int c : idx.children[v]) step(c, Direction::forward);
    for (int p : idx.parents[v]) step(p, Direction::backward);
  };
  extend(source);
  std::sort(out.begin(), out.end());
  return out;
}

bool path_open(const CausalDag& dag, const Path& path, const NodeSet& z) {
  if (path.nodes.size() < 2 || path.steps.size() + 1 != path.nodes.size()) {
    throw Error(ErrorCode::InvalidPath, "malformed path");
  }
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const auto& a = path.nodes[i];
    const auto& b = path.nodes[i + 1];
    bool ok = path.steps[i] == Direction::forward ? dag.has_edge(a, b) : dag.has_edge(b, a);
    if (!ok) {
      throw Error(ErrorCode::InvalidPath, "no edge matches step " + std::to_string(i) +
                                              " of " + path.to_string());
    }
  }
  if (NodeSet(path.nodes.begin(), path.nodes.end()).size() != path.nodes.size()) {
    throw Error(ErrorCode::InvalidPath, "path repeats a node: " + path.to_string());
  }
  if (z.count(path.nodes.front()) || z.count(path.nodes.back())) {
    throw Error(ErrorCode::EndpointConditioned,
                "path endpoints may not be conditioned on: " + path.to_string());
  }
  Index idx(dag);
  return path_open_indexed(idx, path, idx.mask(z));
}

bool d_separated(const CausalDag& dag, const std::string& x, const std::string& y,
                 const NodeSet& z) {
  check_endpoints(x, y);
  Index idx(dag);
  const int source = idx.require(x);
  const int target = idx.require(y);
  auto in_z = idx.mask(z);
  if (in_z[source] || in_z[target]) {
    throw Error(ErrorCode::EndpointConditioned, "endpoints may not be conditioned on");
  }

  // Nodes that are in z or have a descendant in z: colliders there are active.
  std::vector<bool> activates(idx.names.size(), false);
  {
    std::vector<int> stack;
    for (std::size_t v = 0; v < in_z.size(); ++v) {
      if (in_z[v]) {
        activates[v] = true;
        stack.push_back(static_cast<int>(v));
      }
    }
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int p : idx.parents[v]) {
        if (!activates[p]) {
          activates[p] = true;
          stack.push_back(p);
        }
      }
    }
  }

  // State: (node, arrived_from_child). Arriving from a child means the trail
  // points up into the node; arriving from a parent means it points down.
  const std::size_t n = idx.names.size();
  std::vector<bool> visited_up(n, false);
  std::vector<bool> visited_down(n, false);
  std::deque<std::pair<int, bool>> queue{{source, true}};
  while (!queue.empty()) {
    auto [v, up] = queue.front();
    queue.pop_front();
    auto& visited = up ? visited_up : visited_down;
    if (visited[v]) continue;
    visited[v] = true;
    if (v == target) return false;
    if (up) {
      if (in_z[v]) continue;
      for (int p : idx.parents[v]) queue.emplace_back(p, true);
      for (int c : idx.children[v]) queue.emplace_back(c, false);
    } else {
      if (!in_z[v]) {
        for (int c : idx.children[v]) queue.emplace_back(c, false);
      }
      if (activates[v]) {
        for (int p : idx.parents[v]) queue.emplace_back(p, true);
      }
    }
  }
  return true;
}

bool d_separated_by_paths(const CausalDag& dag, const std::string& x,
                          const std::string& y, const NodeSet& z) {
  if (z.count(x) || z.count(y)) {
    throw Error(ErrorCode::EndpointConditioned, "endpoints may not be conditioned on");
  }
  Index idx(dag);
  auto in_z = idx.mask(z);
  for (const auto& path : enumerate_paths(dag, x, y)) {
    if (path_open_indexed(idx, path, in_z)) return false;
  }
  return true;
}

std::vector<Path> backdoor_paths(const CausalDag& dag, const std::string& treatment,
                                 const std::string& outcome) {
  auto all = enumerate_paths(dag, treatment, outcome);
  std::vector<Path> out;
  std::copy_if(all.begin(), all.end(), std::back_inserter(out),
               [](const Path& p) { return p.is_backdoor(); });
  return out;
}

AdjustmentQuery make_adjustment_query(const CausalDag& dag, const std::string& treatment,
                                      const std::string& outcome, const NodeSet& forced) {
  for (const auto& n : forced) {
    if (!dag.has_node(n)) throw Error(ErrorCode::UnknownNode, "node '" + n + "' is not in the graph", 0, {n});
  }
  for (const auto& n : {treatment, outcome}) {
    if (!dag.has_node(n)) throw Error(ErrorCode::UnknownNode, "node '" + n + "' is not in the graph", 0, {n});
  }
  if (treatment == outcome) {
    throw Error(ErrorCode::InvalidQuery, "treatment and outcome must differ");
  }
  if (forced.count(treatment) || forced.count(outcome)) {
    throw Error(ErrorCode::InvalidQuery, "treatment/outcome cannot be forced");
  }
  AdjustmentQuery q{treatment, outcome, forced, {}};
  auto desc = descendants(dag, treatment);
  for (const auto& n : dag.nodes) {
    if (n == treatment || n == outcome || forced.count(n) || desc.count(n)) continue;
    if (dag.role_of(n) == Role::latent) continue;
    q.candidates.insert(n);
  }
  return q;
}

namespace {

void check_query(const Index& idx, const AdjustmentQuery& q) {
  idx.require(q.treatment);
  idx.require(q.outcome);
  for (const auto& n : q.forced) idx.require(n);
  for (const auto& n : q.candidates) idx.require(n);
  if (q.treatment == q.outcome) {
    throw Error(ErrorCode::InvalidQuery, "treatment and outcome must differ");
  }
  if (q.forced.count(q.treatment) || q.forced.count(q.outcome)) {
    throw Error(ErrorCode::InvalidQuery, "treatment/outcome cannot be forced");
  }
}

struct PreparedQuery {
  std::vector<Path> paths;
  std::vector<bool> treatment_descendant;
};

bool valid_with(const Index& idx, const AdjustmentQuery& q, const PreparedQuery& prep,
                const NodeSet& z) {
  for (const auto& n : z) {
    if (prep.treatment_descendant[idx.require(n)]) return false;
  }
  NodeSet conditioned = z;
  conditioned.insert(q.forced.begin(), q.forced.end());
  auto in_z = idx.mask(conditioned);
  for (const auto& path : prep.paths) {
    bool open = path_open_indexed(idx, path, in_z);
    if (path.is_directed() != open) return false;
  }
  return true;
}

}  // namespace

bool is_valid_adjustment(const CausalDag& dag, const AdjustmentQuery& query,
                         const NodeSet& z) {
  Index idx(dag);
  check_query(idx, query);
  for (const auto& n : z) {
    idx.require(n);
    if (!query.candidates.count(n)) {
      throw Error(ErrorCode::CandidateViolation, "'" + n + "' is not an adjustment candidate");
    }
  }
  if (z.count(query.treatment) || z.count(query.outcome)) {
    throw Error(ErrorCode::CandidateViolation, "adjustment set contains an endpoint");
  }
  PreparedQuery prep{enumerate_paths(dag, query.treatment, query.outcome),
                     idx.descendant_mask(idx.require(query.treatment))};
  return valid_with(idx, query, prep, z);
}

std::vector<NodeSet> minimal_adjustment_sets(const CausalDag& dag,
                                             const AdjustmentQuery& query) {
  validate(dag);
  Index idx(dag);
  check_query(idx, query);
  NodeSet candidates = query.candidates;
  candidates.erase(query.treatment);
  candidates.erase(query.outcome);
  std::vector<std::string> pool(candidates.begin(), candidates.end());
  if (pool.size() > 24) {
    throw Error(ErrorCode::TooManyNodes, "exhaustive search limited to 24 candidates");
  }
  PreparedQuery prep{enumerate_paths(dag, query.treatment, query.outcome),
                     idx.descendant_mask(idx.require(query.treatment))};

  const std::size_t k = pool.size();
  std::vector<std::vector<std::string>> found;
  for (std::size_t size = 0; size <= k; ++size) {
    std::vector<std::vector<std::string>> level;
    for (std::uint32_t bits = 0; bits < (1u << k); ++bits) {
      if (static_cast<std::size_t>(std::popcount(bits)) != size) continue;
      NodeSet z;
      for (std::size_t i = 0; i < k; ++i) {
        if (bits & (1u << i)) z.insert(pool[i]);
      }
      bool superset = std::any_of(found.begin(), found.end(), [&](const auto& m) {
        return std::includes(z.begin(), z.end(), m.begin(), m.end());
      });
      if (superset || !valid_with(idx, query, prep, z)) continue;
      level.emplace_back(z.begin(), z.end());
    }
    std::sort(level.begin(), level.end());
    found.insert(found.end(), level.begin(), level.end());
  }
  std::vector<NodeSet> out;
  for (const auto& m : found) out.emplace_back(m.begin(), m.end());
  return out;
}

std::string format_node_set(const NodeSet& set) {
  std::string out = "{";
  bool first = true;
  for (const auto& n : set) {
    if (!first) out += ", ";
    out += n;
    first = false;
  }
  return out + "}";
}

}  // namespace causalkit
