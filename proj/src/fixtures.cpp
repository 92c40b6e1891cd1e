#include "causalkit/fixtures.hpp"

namespace causalkit::fixtures {

StructuralModel case_study_model() {
  return StructuralModel{{
      {kGenetic, 0.1, {}},
      {kParentEducation, 0.9, {}},
      {kCarerInteraction, 0.1, {{kParentEducation, 0.85}}},
      {kConductEntry, 0.65, {{kParentEducation, -0.3}, {kCarerInteraction, -0.3}, {kGenetic, 0.3}}},
      {kChildcare, 0.25, {{kConductEntry, 0.5}}},
      {kPlaygroup, 0.1, {{kChildcare, 0.34}, {kParentEducation, 0.54}}},
      {kConductSchool, 0.65,
       {{kParentEducation, -0.3}, {kConductEntry, 0.3}, {kCarerInteraction, -0.3}}},
  }};
}

CausalDag case_study_no_effect_dag() {
  CausalDag dag = model_dag(case_study_model());
  dag.set_role(kChildcare, Role::treatment);
  dag.set_role(kConductSchool, Role::outcome);
  return dag;
}

CausalDag case_study_dag() {
  CausalDag dag = case_study_no_effect_dag();
  dag.add_edge(kChildcare, kConductSchool);
  return dag;
}

StructuralModel confounder_model() {
  return StructuralModel{{
      {"C", 0.5, {}},
      {"A", 0.25, {{"C", 0.5}}},
      {"B", 0.25, {{"C", 0.5}}},
  }};
}

StructuralModel mediator_model() {
  return StructuralModel{{
      {"A", 0.5, {}},
      {"C", 0.25, {{"A", 0.5}}},
      {"B", 0.25, {{"C", 0.5}}},
  }};
}

StructuralModel collider_model() {
  return StructuralModel{{
      {"A", 0.1, {}},
      {"B", 0.1, {}},
      {"C", 0.15, {{"A", 0.4}, {"B", 0.4}}},
  }};
}

CausalDag fork_dag() {
  CausalDag dag;
  dag.nodes = {"A", "B", "C"};
  dag.add_edge("C", "A");
  dag.add_edge("C", "B");
  return dag;
}

CausalDag collider_dag() {
  CausalDag dag;
  dag.nodes = {"A", "B", "C"};
  dag.add_edge("A", "C");
  dag.add_edge("B", "C");
  return dag;
}

CausalDag chain_dag() {
  CausalDag dag;
  dag.nodes = {"A", "B", "C"};
  dag.add_edge("A", "C");
  dag.add_edge("C", "B");
  return dag;
}

CausalDag confounding_example_dag() {
  CausalDag dag;
  dag.add_edge("finances", "structural_quality");
  dag.add_edge("finances", "process_quality");
  dag.add_edge("process_quality", "development");
  dag.set_role("structural_quality", Role::treatment);
  dag.set_role("development", Role::outcome);
  return dag;
}

CausalDag disconnected_dag() {
  CausalDag dag;
  dag.nodes = {"A", "B"};
  return dag;
}

std::vector<std::pair<std::string, CausalDag>> all_dags() {
  return {
      {"fork", fork_dag()},
      {"collider", collider_dag()},
      {"chain", chain_dag()},
      {"confounding", confounding_example_dag()},
      {"case_study", case_study_dag()},
      {"case_study_no_effect", case_study_no_effect_dag()},
      {"confounder_model", model_dag(confounder_model())},
      {"mediator_model", model_dag(mediator_model())},
      {"collider_model", model_dag(collider_model())},
      {"disconnected", disconnected_dag()},
  };
}

}  // namespace causalkit::fixtures
