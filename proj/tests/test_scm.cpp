#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "causalkit/error.hpp"
#include "causalkit/fixtures.hpp"
#include "causalkit/rng.hpp"
#include "causalkit/scm.hpp"
#include "oracles.hpp"

using namespace causalkit;
namespace fx = causalkit::fixtures;

namespace {

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an Error");
  return Error(ErrorCode::ModelInvalid, "unreachable");
}

double four_sigma(double p, double n) { return 4 * std::sqrt(p * (1 - p) / n); }

}  // namespace

TEST_SUITE("scm_sim") {

TEST_CASE("the case-study model is valid and realises the no-effect diagram") {
  auto m = fx::case_study_model();
  CHECK_NOTHROW(validate_model(m));
  CHECK(m.equations.size() == 7);
  auto dag = model_dag(m);
  auto expected = fx::case_study_no_effect_dag();
  CHECK(std::set<Edge>(dag.edges.begin(), dag.edges.end()) ==
        std::set<Edge>(expected.edges.begin(), expected.edges.end()));
  CHECK_NOTHROW(validate_model(fx::confounder_model()));
  CHECK_NOTHROW(validate_model(fx::mediator_model()));
  CHECK_NOTHROW(validate_model(fx::collider_model()));
}

TEST_CASE("conduct_entry probabilities stay inside [0.05, 0.95]") {
  auto model = fx::case_study_model();
  const auto& eq = model.equation(fx::kConductEntry);
  double lo = 1, hi = 0;
  for (int e = 0; e < 2; ++e) {
    for (int i = 0; i < 2; ++i) {
      for (int g = 0; g < 2; ++g) {
        double p = 0.65 - 0.3 * e - 0.3 * i + 0.3 * g;
        double q = eq.intercept + eq.parents.at(fx::kParentEducation) * e +
                   eq.parents.at(fx::kCarerInteraction) * i + eq.parents.at(fx::kGenetic) * g;
        CHECK(q == doctest::Approx(p).epsilon(1e-15));
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
    }
  }
  CHECK(lo == doctest::Approx(0.05));
  CHECK(hi == doctest::Approx(0.95));
}

TEST_CASE("invalid models") {
  StructuralModel bad{{{"A", 1.2, {}}}};
  auto e = error_of([&] { validate_model(bad); });
  CHECK(e.code() == ErrorCode::ProbabilityOutOfRange);
  CHECK(e.nodes().front() == "A");

  StructuralModel config{{{"A", 0.5, {}}, {"B", 0.7, {{"A", 0.5}}}}};
  auto c = error_of([&] { validate_model(config); });
  CHECK(c.code() == ErrorCode::ProbabilityOutOfRange);
  CHECK(std::string(c.what()).find("A=1") != std::string::npos);

  StructuralModel order{{{"B", 0.5, {{"A", 0.1}}}, {"A", 0.5, {}}}};
  CHECK(error_of([&] { validate_model(order); }).code() == ErrorCode::ParentOrderViolation);

  StructuralModel unknown{{{"B", 0.5, {{"Q", 0.1}}}}};
  CHECK(error_of([&] { validate_model(unknown); }).code() == ErrorCode::UnknownParent);

  StructuralModel twice{{{"A", 0.5, {}}, {"A", 0.5, {}}}};
  CHECK(error_of([&] { validate_model(twice); }).code() == ErrorCode::DuplicateNode);

  CHECK(error_of([&] { sample(bad, 10, 1); }).code() == ErrorCode::ModelInvalid);
}

TEST_CASE("sample follows the documented generation contract") {
  auto m = fx::case_study_model();
  const std::uint64_t seed = 777;
  auto d = sample(m, 50, seed);
  for (std::size_t r = 0; r < 50; ++r) {
    SplitMix64 g(mix(seed, r));
    std::map<std::string, int> values;
    for (const auto& eq : m.equations) {
      double p = eq.intercept;
      for (const auto& [parent, coef] : eq.parents) p += coef * values[parent];
      values[eq.node] = g.uniform() < p ? 1 : 0;
      CHECK(d.column(eq.node)[r] == values[eq.node]);
    }
  }
}

TEST_CASE("sampling is deterministic and splits by row range") {
  auto m = fx::case_study_model();
  CHECK(sample(m, 1000, 3) == sample(m, 1000, 3));
  CHECK_FALSE(sample(m, 1000, 3) == sample(m, 1000, 4));
  auto whole = sample(m, 1000, 3);
  std::vector<std::size_t> idx(300);
  std::iota(idx.begin(), idx.end(), 500);
  CHECK(sample_rows(m, 500, 300, 3) == whole.take_rows(idx));

  auto empty = sample(m, 0, 3);
  CHECK(empty.rows() == 0);
  CHECK(empty.columns() == m.node_names());
}

TEST_CASE("a million rows: parent_education mean and selected fraction") {
  auto m = fx::case_study_model();
  auto d = sample(m, 1'000'000, 2024);
  auto means = column_means(d);
  CHECK(means[1] >= 0.899);
  CHECK(means[1] <= 0.901);
  auto selected = apply_selection(d, {fx::kPlaygroup, 1});
  double expected = oracle::joint(m).mass({{fx::kPlaygroup, 1}}) * 1e6;
  CHECK(expected == doctest::Approx(696585.0).epsilon(1e-5));
  CHECK(std::abs(double(selected.rows()) - expected) < 5000);
}

TEST_CASE("sample means converge to the exact marginals") {
  for (const auto& m : {fx::case_study_model(), fx::confounder_model(), fx::collider_model()}) {
    const double n = 1e5;
    auto means = column_means(sample(m, std::size_t(n), 31));
    auto exact = column_means(enumerate_population(m));
    for (std::size_t c = 0; c < means.size(); ++c) {
      CHECK(std::abs(means[c] - exact[c]) < four_sigma(exact[c], n));
    }
  }
}

TEST_CASE("selecting a sample matches the selected population") {
  auto m = fx::case_study_model();
  SelectionRule rule{fx::kPlaygroup, 1};
  auto d = apply_selection(sample(m, 100'000, 32), rule);
  auto means = column_means(d);
  auto exact = column_means(enumerate_population(m, rule));
  for (std::size_t c = 0; c < means.size(); ++c) {
    CHECK(std::abs(means[c] - exact[c]) <= four_sigma(std::max(exact[c], 1e-3), double(d.rows())));
  }
}

TEST_CASE("enumerate_population") {
  auto pop = enumerate_population(fx::confounder_model());
  REQUIRE(pop.rows() == 8);
  CHECK(pop.columns() == std::vector<std::string>{"C", "A", "B"});
  // Row 7 is C=1, A=1, B=1.
  CHECK(pop.column("C")[7] == 1);
  CHECK(pop.weight(7) == doctest::Approx(0.5 * 0.75 * 0.75).epsilon(1e-15));

  for (const auto& m : {fx::case_study_model(), fx::confounder_model(), fx::mediator_model(),
                        fx::collider_model()}) {
    auto p = enumerate_population(m);
    CHECK(std::abs(p.total_weight() - 1.0) < 1e-12);
    for (double w : p.weights()) CHECK(w >= 0);
    auto j = oracle::joint(m);
    for (std::size_t r = 0; r < p.rows(); ++r) CHECK(p.weight(r) == doctest::Approx(j.probs[r]));
  }
  CHECK(enumerate_population(fx::case_study_model()).rows() == 128);

  auto sel = enumerate_population(fx::case_study_model(), SelectionRule{fx::kPlaygroup, 1});
  CHECK(sel.rows() == 64);
  CHECK(std::abs(sel.total_weight() - 1.0) < 1e-12);
}

TEST_CASE("enumeration guards") {
  StructuralModel never{{{"A", 0.0, {}}, {"B", 0.5, {}}}};
  CHECK(error_of([&] { enumerate_population(never, SelectionRule{"A", 1}); }).code() ==
        ErrorCode::EmptySelection);
  StructuralModel big;
  for (int i = 0; i < 25; ++i) big.equations.push_back({"n" + std::to_string(i), 0.5, {}});
  CHECK(error_of([&] { enumerate_population(big); }).code() == ErrorCode::TooManyNodes);
}

TEST_CASE("population_risk_ratio") {
  CHECK(population_risk_ratio(fx::confounder_model(), "A", "B") ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(population_risk_ratio(fx::mediator_model(), "A", "B") ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(population_risk_ratio(fx::collider_model(), "A", "B") - 1.0) < 1e-12);

  auto m = fx::case_study_model();
  auto j = oracle::joint(m);
  double expected = j.conditional(fx::kConductSchool, {{fx::kChildcare, 1}}) /
                    j.conditional(fx::kConductSchool, {{fx::kChildcare, 0}});
  double rr = population_risk_ratio(m, fx::kChildcare, fx::kConductSchool);
  CHECK(rr == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rr == doctest::Approx(2.41).epsilon(0.01));

  StructuralModel never{{{"A", 0.0, {}}, {"B", 0.5, {}}}};
  CHECK(error_of([&] { population_risk_ratio(never, "A", "B"); }).code() ==
        ErrorCode::DegenerateTreatment);
}

TEST_CASE("d-separation implies exact conditional independence") {
  auto m = fx::case_study_model();
  auto dag = model_dag(m);
  auto j = oracle::joint(m);
  int separated = 0;
  for (const auto& x : dag.nodes) {
    for (const auto& y : dag.nodes) {
      if (x >= y) continue;
      std::vector<std::string> rest;
      for (const auto& n : dag.nodes) {
        if (n != x && n != y) rest.push_back(n);
      }
      for (const auto& z : oracle::subsets(rest)) {
        if (!d_separated(dag, x, y, z)) continue;
        ++separated;
        CHECK(oracle::max_arm_gap(j, x, y, {z.begin(), z.end()}) < 1e-12);
      }
    }
  }
  CHECK(separated > 0);
}

}  // TEST_SUITE
