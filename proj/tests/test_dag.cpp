#include <doctest.h>

#include <functional>

#include <algorithm>

#include "causalkit/dag.hpp"
#include "causalkit/error.hpp"
#include "causalkit/fixtures.hpp"
#include "oracles.hpp"

using namespace causalkit;
namespace fx = causalkit::fixtures;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidQuery;
}

CausalDag chain_ab() {
  CausalDag dag;
  dag.add_edge("A", "B");
  return dag;
}

Path path_of(const CausalDag& dag, const std::string& x, const std::string& y) {
  auto paths = enumerate_paths(dag, x, y);
  REQUIRE(paths.size() == 1);
  return paths.front();
}

}  // namespace

TEST_SUITE("dag_core") {

TEST_CASE("validate accepts a two-node chain and the case-study diagram") {
  CHECK_NOTHROW(validate(chain_ab()));
  auto dag = fx::case_study_dag();
  CHECK_NOTHROW(validate(dag));
  CHECK(dag.nodes.size() == 7);
  CHECK(dag.edges.size() == 11);
  CHECK(dag.has_edge(fx::kChildcare, fx::kConductSchool));
  CHECK(fx::case_study_no_effect_dag().edges.size() == 10);
}

TEST_CASE("validate reports the smallest cycle with its nodes") {
  CausalDag dag;
  dag.add_edge("A", "B");
  dag.add_edge("B", "A");
  try {
    validate(dag);
    FAIL("cycle not detected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CycleDetected);
    CHECK(e.nodes() == std::vector<std::string>{"A", "B"});
  }
}

TEST_CASE("validate names each broken invariant") {
  CausalDag self;
  self.add_edge("A", "A");
  CHECK(code_of([&] { validate(self); }) == ErrorCode::SelfLoop);

  CausalDag dup = chain_ab();
  dup.add_edge("A", "B");
  CHECK(code_of([&] { validate(dup); }) == ErrorCode::DuplicateEdge);

  CausalDag dup_node = chain_ab();
  dup_node.nodes.push_back("A");
  CHECK(code_of([&] { validate(dup_node); }) == ErrorCode::DuplicateNode);

  CausalDag dangling = chain_ab();
  dangling.edges.push_back({"B", "Z"});
  CHECK(code_of([&] { validate(dangling); }) == ErrorCode::UnknownEdgeEndpoint);

  CausalDag roles = chain_ab();
  roles.set_role("A", Role::treatment);
  roles.set_role("B", Role::treatment);
  CHECK(code_of([&] { validate(roles); }) == ErrorCode::RoleConflict);
}

TEST_CASE("longer cycles list every member") {
  CausalDag dag;
  dag.add_edge("A", "B");
  dag.add_edge("B", "C");
  dag.add_edge("C", "D");
  dag.add_edge("D", "B");
  try {
    validate(dag);
    FAIL("cycle not detected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CycleDetected);
    auto nodes = e.nodes();
    std::sort(nodes.begin(), nodes.end());
    CHECK(nodes == std::vector<std::string>{"B", "C", "D"});
  }
}

TEST_CASE("topological order puts parents first") {
  for (const auto& [name, dag] : fx::all_dags()) {
    CAPTURE(name);
    auto order = topological_order(dag);
    REQUIRE(order.size() == dag.nodes.size());
    for (const auto& e : dag.edges) {
      auto p = std::find(order.begin(), order.end(), e.parent);
      auto c = std::find(order.begin(), order.end(), e.child);
      CHECK(p < c);
    }
  }
}

TEST_CASE("descendants and ancestors are strict") {
  auto dag = fx::case_study_no_effect_dag();
  CHECK(descendants(dag, fx::kChildcare) == NodeSet{fx::kPlaygroup});
  CHECK(ancestors(dag, fx::kChildcare) ==
        NodeSet{fx::kConductEntry, fx::kParentEducation, fx::kCarerInteraction, fx::kGenetic});
  CHECK(code_of([&] { descendants(dag, "nope"); }) == ErrorCode::UnknownNode);
}

TEST_CASE("enumerate_paths") {
  CHECK(enumerate_paths(fx::disconnected_dag(), "A", "B").empty());

  auto collider = fx::collider_dag();
  auto p = path_of(collider, "A", "B");
  CHECK(p.nodes == std::vector<std::string>{"A", "C", "B"});
  CHECK(p.to_string() == "A -> C <- B");
  CHECK(p.kind(1) == NodeKind::collider);

  auto dag = fx::case_study_no_effect_dag();
  auto paths = enumerate_paths(dag, fx::kChildcare, fx::kConductSchool);
  auto backdoor = backdoor_paths(dag, fx::kChildcare, fx::kConductSchool);
  CHECK(backdoor.size() == 5);
  for (const auto& bp : backdoor) {
    CHECK(bp.nodes[1] == fx::kConductEntry);
    CHECK(bp.steps[0] == Direction::backward);
  }
  CHECK(std::is_sorted(paths.begin(), paths.end(),
                       [](const Path& a, const Path& b) { return a.nodes < b.nodes; }));
  CHECK(code_of([&] { enumerate_paths(dag, fx::kChildcare, "nope"); }) == ErrorCode::UnknownNode);
}

TEST_CASE("path kinds follow the step directions") {
  CHECK(path_of(fx::fork_dag(), "A", "B").kind(1) == NodeKind::fork);
  CHECK(path_of(fx::chain_dag(), "A", "B").kind(1) == NodeKind::chain);
  CHECK(path_of(fx::chain_dag(), "A", "B").is_directed());
  CHECK(path_of(fx::fork_dag(), "A", "B").is_backdoor());
  CHECK_FALSE(path_of(fx::collider_dag(), "A", "B").is_backdoor());
}

TEST_CASE("path_open on the three building blocks") {
  auto fork = fx::fork_dag();
  auto collider = fx::collider_dag();
  auto chain = fx::chain_dag();
  CHECK(path_open(fork, path_of(fork, "A", "B"), {}));
  CHECK_FALSE(path_open(fork, path_of(fork, "A", "B"), {"C"}));
  CHECK_FALSE(path_open(collider, path_of(collider, "A", "B"), {}));
  CHECK(path_open(collider, path_of(collider, "A", "B"), {"C"}));
  CHECK(path_open(chain, path_of(chain, "A", "B"), {}));
  CHECK_FALSE(path_open(chain, path_of(chain, "A", "B"), {"C"}));
}

TEST_CASE("a collider opens when a descendant is conditioned on") {
  auto dag = fx::collider_dag();
  dag.add_edge("C", "D");
  auto p = path_of(dag, "A", "B");
  CHECK_FALSE(path_open(dag, p, {}));
  CHECK(path_open(dag, p, {"D"}));
  CHECK_FALSE(d_separated(dag, "A", "B", {"D"}));
}

TEST_CASE("path_open rejects conditioned endpoints and foreign paths") {
  auto fork = fx::fork_dag();
  auto p = path_of(fork, "A", "B");
  CHECK(code_of([&] { path_open(fork, p, {"A"}); }) == ErrorCode::EndpointConditioned);
  CHECK(code_of([&] { path_open(fx::chain_dag(), p, {}); }) == ErrorCode::InvalidPath);
  CHECK(code_of([&] { d_separated(fork, "A", "B", {"B"}); }) == ErrorCode::EndpointConditioned);
}

TEST_CASE("d_separated examples") {
  auto dag = fx::case_study_no_effect_dag();
  CHECK(d_separated(dag, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry}));
  CHECK_FALSE(
      d_separated(dag, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry, fx::kPlaygroup}));
  CHECK(d_separated(dag, fx::kChildcare, fx::kConductSchool,
                    {fx::kConductEntry, fx::kPlaygroup, fx::kParentEducation}));
  CHECK(d_separated(fx::disconnected_dag(), "A", "B", {}));
  CHECK(code_of([&] { d_separated(dag, "nope", fx::kChildcare, {}); }) == ErrorCode::UnknownNode);
}

TEST_CASE("backdoor_paths") {
  auto fig3 = fx::confounding_example_dag();
  auto bp = backdoor_paths(fig3, "structural_quality", "development");
  REQUIRE(bp.size() == 1);
  CHECK(bp[0].to_string() == "structural_quality <- finances -> process_quality -> development");
  CHECK(backdoor_paths(fx::collider_dag(), "A", "B").empty());
  CHECK(backdoor_paths(fx::case_study_dag(), fx::kChildcare, fx::kConductSchool).size() == 5);
}

TEST_CASE("is_valid_adjustment on the case study") {
  auto dag = fx::case_study_dag();
  auto q = make_adjustment_query(dag, fx::kChildcare, fx::kConductSchool);
  CHECK(q.candidates ==
        NodeSet{fx::kConductEntry, fx::kParentEducation, fx::kCarerInteraction, fx::kGenetic});
  CHECK(is_valid_adjustment(dag, q, {fx::kConductEntry}));
  CHECK_FALSE(is_valid_adjustment(dag, q, {}));
  // weekend_playgroup descends from the treatment and is no candidate.
  q.candidates.insert(fx::kPlaygroup);
  CHECK_FALSE(is_valid_adjustment(dag, q, {fx::kConductEntry, fx::kPlaygroup}));

  auto forced = make_adjustment_query(dag, fx::kChildcare, fx::kConductSchool, {fx::kPlaygroup});
  CHECK(is_valid_adjustment(dag, forced, {fx::kConductEntry, fx::kParentEducation}));
  CHECK_FALSE(is_valid_adjustment(dag, forced, {fx::kConductEntry}));
}

TEST_CASE("is_valid_adjustment guards its inputs") {
  auto dag = fx::case_study_dag();
  auto q = make_adjustment_query(dag, fx::kChildcare, fx::kConductSchool);
  CHECK(code_of([&] { is_valid_adjustment(dag, q, {fx::kPlaygroup}); }) ==
        ErrorCode::CandidateViolation);
  CHECK(code_of([&] { make_adjustment_query(dag, fx::kChildcare, fx::kChildcare); }) ==
        ErrorCode::InvalidQuery);
  CHECK(code_of([&] {
          make_adjustment_query(dag, fx::kChildcare, fx::kConductSchool, {fx::kChildcare});
        }) == ErrorCode::InvalidQuery);
}

TEST_CASE("a blocked causal path invalidates the set") {
  // Adjusting for a mediator closes the directed path.
  auto dag = fx::chain_dag();
  AdjustmentQuery q{"A", "B", {}, {"C"}};
  CHECK(is_valid_adjustment(dag, q, {}));
  CHECK_FALSE(is_valid_adjustment(dag, q, {"C"}));
}

TEST_CASE("minimal_adjustment_sets") {
  auto dag = fx::case_study_dag();
  auto none = minimal_adjustment_sets(dag, make_adjustment_query(dag, fx::kChildcare,
                                                                 fx::kConductSchool));
  CHECK(none == std::vector<NodeSet>{{fx::kConductEntry}});
  CHECK(format_node_set(none.front()) == "{conduct_entry}");

  auto forced = minimal_adjustment_sets(
      dag, make_adjustment_query(dag, fx::kChildcare, fx::kConductSchool, {fx::kPlaygroup}));
  CHECK(forced == std::vector<NodeSet>{{fx::kConductEntry, fx::kParentEducation}});
  CHECK(format_node_set(forced.front()) == "{conduct_entry, parent_education}");

  auto disconnected = fx::disconnected_dag();
  CHECK(minimal_adjustment_sets(disconnected, make_adjustment_query(disconnected, "A", "B")) ==
        std::vector<NodeSet>{NodeSet{}});

  // Conditioning on a collider descendant with nothing to block it.
  auto collider = fx::collider_dag();
  CHECK(minimal_adjustment_sets(collider, make_adjustment_query(collider, "A", "B", {"C"}))
            .empty());
}

TEST_CASE("minimal sets are valid, minimal and an antichain") {
  for (int seed = 0; seed < 40; ++seed) {
    auto dag = oracle::random_dag(seed, 7, 0.35);
    const std::string t = dag.nodes[1], o = dag.nodes[5];
    auto q = make_adjustment_query(dag, t, o);
    auto sets = minimal_adjustment_sets(dag, q);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      CHECK(is_valid_adjustment(dag, q, sets[i]));
      for (const auto& member : sets[i]) {
        NodeSet smaller = sets[i];
        smaller.erase(member);
        CHECK_FALSE(is_valid_adjustment(dag, q, smaller));
      }
      for (std::size_t j = 0; j < sets.size(); ++j) {
        if (i == j) continue;
        CHECK_FALSE(std::includes(sets[j].begin(), sets[j].end(), sets[i].begin(), sets[i].end()));
      }
      if (i > 0) CHECK(sets[i - 1].size() <= sets[i].size());
    }
    // Every valid subset contains some minimal set.
    std::vector<std::string> cands(q.candidates.begin(), q.candidates.end());
    for (const auto& z : oracle::subsets(cands)) {
      if (!is_valid_adjustment(dag, q, z)) continue;
      bool covered = std::any_of(sets.begin(), sets.end(), [&](const NodeSet& s) {
        return std::includes(z.begin(), z.end(), s.begin(), s.end());
      });
      CHECK(covered);
    }
  }
}

TEST_CASE("both d-separation routines match the moral-graph oracle on every fixture") {
  for (const auto& [name, dag] : fx::all_dags()) {
    CAPTURE(name);
    for (const auto& x : dag.nodes) {
      for (const auto& y : dag.nodes) {
        if (x >= y) continue;
        std::vector<std::string> rest;
        for (const auto& n : dag.nodes) {
          if (n != x && n != y) rest.push_back(n);
        }
        for (const auto& z : oracle::subsets(rest)) {
          bool reach = d_separated(dag, x, y, z);
          CHECK(reach == d_separated_by_paths(dag, x, y, z));
          CHECK(reach == oracle::moral_d_separated(dag, x, y, z));
          CHECK(reach == d_separated(dag, y, x, z));
        }
      }
    }
  }
}

TEST_CASE("d-separation agrees with the oracle on random graphs") {
  for (int seed = 100; seed < 160; ++seed) {
    auto dag = oracle::random_dag(seed, 8, 0.3);
    const std::string x = dag.nodes[0], y = dag.nodes[7];
    std::vector<std::string> rest(dag.nodes.begin() + 1, dag.nodes.end() - 1);
    for (const auto& z : oracle::subsets(rest)) {
      bool reach = d_separated(dag, x, y, z);
      CHECK(reach == d_separated_by_paths(dag, x, y, z));
      CHECK(reach == oracle::moral_d_separated(dag, x, y, z));
    }
  }
}

TEST_CASE("path status is symmetric under reversal") {
  auto dag = fx::case_study_dag();
  std::vector<std::string> rest = {fx::kConductEntry, fx::kParentEducation, fx::kCarerInteraction,
                                   fx::kGenetic, fx::kPlaygroup};
  for (const auto& p : enumerate_paths(dag, fx::kChildcare, fx::kConductSchool)) {
    auto r = p.reversed();
    CHECK(r.nodes.front() == fx::kConductSchool);
    for (const auto& z : oracle::subsets(rest)) CHECK(path_open(dag, p, z) == path_open(dag, r, z));
  }
}

TEST_CASE("adding a non-collider interior node closes an open path") {
  for (int seed = 0; seed < 30; ++seed) {
    auto dag = oracle::random_dag(seed, 7, 0.4);
    const std::string x = dag.nodes[0], y = dag.nodes[6];
    std::vector<std::string> rest(dag.nodes.begin() + 1, dag.nodes.end() - 1);
    for (const auto& p : enumerate_paths(dag, x, y)) {
      for (const auto& z : oracle::subsets(rest)) {
        if (!path_open(dag, p, z)) continue;
        for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) {
          if (p.kind(i) == NodeKind::collider || z.count(p.nodes[i])) continue;
          NodeSet bigger = z;
          bigger.insert(p.nodes[i]);
          CHECK_FALSE(path_open(dag, p, bigger));
        }
      }
    }
  }
}

TEST_CASE("format_node_set") {
  CHECK(format_node_set({}) == "{}");
  CHECK(format_node_set({"b", "a"}) == "{a, b}");
}

}  // TEST_SUITE
