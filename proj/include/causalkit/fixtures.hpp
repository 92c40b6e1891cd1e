#pragma once

// Built-in diagrams and structural models: the childcare case study and the
// three two-variable building blocks (fork, collider, chain).

#include <string>
#include <utility>
#include <vector>

#include "causalkit/dag.hpp"
#include "causalkit/scm.hpp"

namespace causalkit::fixtures {

// Case-study variables.
inline const std::string kGenetic = "genetic_effect";
inline const std::string kParentEducation = "parent_education";
inline const std::string kCarerInteraction = "carer_interaction";
inline const std::string kConductEntry = "conduct_entry";
inline const std::string kChildcare = "childcare";
inline const std::string kPlaygroup = "weekend_playgroup";
inline const std::string kConductSchool = "conduct_school";

/// Simulation model of the case study. There is deliberately no
/// childcare -> conduct_school term: the true risk ratio is 1.
///
///   genetic_effect    ~ Bern(0.1)
///   parent_education  ~ Bern(0.9)
///   carer_interaction ~ Bern(0.1 + 0.85 E)
///   conduct_entry     ~ Bern(0.65 - 0.3 E - 0.3 I + 0.3 G)
///   childcare         ~ Bern(0.25 + 0.5 Ce)
///   weekend_playgroup ~ Bern(0.1 + 0.34 A + 0.54 E)
///   conduct_school    ~ Bern(0.65 - 0.3 E + 0.3 Ce - 0.3 I)
StructuralModel case_study_model();

/// The analysis diagram: the model's edges plus childcare -> conduct_school,
/// with treatment and outcome roles.
CausalDag case_study_dag();

/// The diagram the simulation actually realizes (no treatment -> outcome edge).
CausalDag case_study_no_effect_dag();

/// C ~ Bern(0.5); A, B ~ Bern(0.25 + 0.5 C).
StructuralModel confounder_model();
/// A ~ Bern(0.5); C ~ Bern(0.25 + 0.5 A); B ~ Bern(0.25 + 0.5 C).
StructuralModel mediator_model();
/// A, B ~ Bern(0.1); C ~ Bern(0.15 + 0.4 A + 0.4 B).
StructuralModel collider_model();

/// A <- C -> B
CausalDag fork_dag();
/// A -> C <- B
CausalDag collider_dag();
/// A -> C -> B
CausalDag chain_dag();
/// finances -> structural_quality, finances -> process_quality -> development.
CausalDag confounding_example_dag();
/// Two unconnected nodes A and B.
CausalDag disconnected_dag();

/// Every built-in diagram with a short name, for exhaustive checks.
std::vector<std::pair<std::string, CausalDag>> all_dags();

}  // namespace causalkit::fixtures
