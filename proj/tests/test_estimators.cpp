#include <doctest.h>

#include <atomic>
#include <cmath>
#include <functional>

#include "causalkit/dag.hpp"
#include "causalkit/error.hpp"
#include "causalkit/estimators.hpp"
#include "causalkit/fixtures.hpp"
#include "causalkit/scm.hpp"
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
  return ErrorCode::InvalidSpec;
}

const Dataset& case_study_sample() {
  static const Dataset d = sample(fx::case_study_model(), 200'000, 404);
  return d;
}

/// sum_c P(c) P(y | a, c) over strata of one binary adjuster, straight from counts.
double standardized_ratio(const Dataset& d, const std::string& a, const std::string& y,
                          const std::string& c) {
  double n[2][2] = {{0, 0}, {0, 0}};
  double events[2][2] = {{0, 0}, {0, 0}};
  double total = 0;
  auto av = d.column(a), yv = d.column(y), cv = d.column(c);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    n[cv[r]][av[r]] += d.weight(r);
    events[cv[r]][av[r]] += d.weight(r) * yv[r];
    total += d.weight(r);
  }
  double treated = 0, control = 0;
  for (int s = 0; s < 2; ++s) {
    double pc = (n[s][0] + n[s][1]) / total;
    treated += pc * events[s][1] / n[s][1];
    control += pc * events[s][0] / n[s][0];
  }
  return treated / control;
}

AnalysisRequest request(Method m, std::vector<std::string> adjust) {
  AnalysisRequest r;
  r.method = m;
  r.treatment = fx::kChildcare;
  r.outcome = fx::kConductSchool;
  r.adjust = std::move(adjust);
  return r;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("identical arms give exactly one") {
  Dataset d({"a", "y"}, {{0, 0, 1, 1, 0, 1}, {0, 1, 0, 1, 1, 1}});
  auto e = unadjusted_rr(d, "a", "y");
  CHECK(e.risk_ratio == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.ci_method == CiMethod::wald);
  CHECK(e.ci_low < 1.0);
  CHECK(e.ci_high > 1.0);
}

TEST_CASE("unadjusted ratio matches arm means and the covariate-free fit") {
  const auto& d = case_study_sample();
  auto a = d.column(fx::kChildcare);
  auto y = d.column(fx::kConductSchool);
  double n1 = 0, n0 = 0, e1 = 0, e0 = 0;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    (a[r] ? n1 : n0) += 1;
    (a[r] ? e1 : e0) += y[r];
  }
  auto e = unadjusted_rr(d, fx::kChildcare, fx::kConductSchool);
  CHECK(std::abs(e.risk_ratio - (e1 / n1) / (e0 / n0)) < 1e-12);
  CHECK(std::abs(e.risk_ratio - e.diagnostics.at("fit_risk_ratio")) < 1e-8);
  CHECK(e.ci_low <= e.risk_ratio);
  CHECK(e.risk_ratio <= e.ci_high);
  CHECK(e.n == d.rows());
}

TEST_CASE("mediator data at n = 10^4 is close to 5/3") {
  auto d = sample(fx::mediator_model(), 10'000, 1007);
  auto e = unadjusted_rr(d, "A", "B");
  CHECK(e.ci_low < 5.0 / 3.0);
  CHECK(e.ci_high > 5.0 / 3.0);
  CHECK(std::abs(e.risk_ratio - 5.0 / 3.0) < 0.15);
}

TEST_CASE("unadjusted errors") {
  Dataset one_arm({"a", "y"}, {{1, 1, 1}, {0, 1, 0}});
  CHECK(code_of([&] { unadjusted_rr(one_arm, "a", "y"); }) == ErrorCode::DegenerateArm);
  Dataset no_control_risk({"a", "y"}, {{1, 1, 0, 0}, {0, 1, 0, 0}});
  CHECK(code_of([&] { unadjusted_rr(no_control_risk, "a", "y"); }) ==
        ErrorCode::ZeroRiskControlArm);
  CHECK(code_of([&] { unadjusted_rr(one_arm, "a", "a"); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("G-computation and IPW over no adjusters reduce to the unadjusted ratio") {
  const auto& d = case_study_sample();
  double u = unadjusted_rr(d, fx::kChildcare, fx::kConductSchool).risk_ratio;
  CHECK(std::abs(g_computation_rr(d, fx::kChildcare, fx::kConductSchool, {}, false, {})
                     .risk_ratio -
                 u) < 1e-8);
  CHECK(std::abs(ipw_rr(d, fx::kChildcare, fx::kConductSchool, {}, {}).risk_ratio - u) < 1e-8);
}

TEST_CASE("saturated G-computation equals stratum standardization") {
  const auto& d = case_study_sample();
  for (const auto& c : {fx::kConductEntry, fx::kParentEducation, fx::kPlaygroup}) {
    CAPTURE(c);
    auto g = g_computation_rr(d, fx::kChildcare, fx::kConductSchool, {c}, true, {});
    CHECK(std::abs(g.risk_ratio - standardized_ratio(d, fx::kChildcare, fx::kConductSchool, c)) <
          1e-8);
  }
}

TEST_CASE("IPW is invariant to rescaling the row weights") {
  const auto& d = case_study_sample();
  auto compact = compress_rows(d.select_columns(
                                   {fx::kChildcare, fx::kConductSchool, fx::kConductEntry}))
                     .patterns;
  auto scaled = compact.with_weights([&] {
    std::vector<double> w(compact.weights().begin(), compact.weights().end());
    for (auto& v : w) v *= 37.25;
    return w;
  }());
  auto a = ipw_rr(compact, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry}, {});
  auto b = ipw_rr(scaled, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry}, {});
  CHECK(std::abs(a.risk_ratio - b.risk_ratio) < 1e-10);
  // Compression itself changes nothing.
  auto full = ipw_rr(d, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry}, {});
  CHECK(std::abs(full.risk_ratio - a.risk_ratio) < 1e-10);
  CHECK(full.diagnostics.at("min_weight") >= 1.0);
  CHECK(full.diagnostics.at("max_weight") >= full.diagnostics.at("min_weight"));
}

TEST_CASE("bootstrap: constant statistic and determinism") {
  const auto& d = case_study_sample();
  BootstrapSpec spec{40, 9, 0.95, 1};
  auto c = bootstrap_ci(d, [](const Dataset&) { return 2.5; }, spec);
  CHECK(c.low == 2.5);
  CHECK(c.high == 2.5);
  CHECK(c.se == 0.0);

  auto mean_y = [](const Dataset& rows) {
    double num = 0, den = 0;
    auto y = rows.column(fx::kConductSchool);
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      num += rows.weight(r) * y[r];
      den += rows.weight(r);
    }
    return num / den;
  };
  auto first = bootstrap_ci(d, mean_y, spec);
  auto second = bootstrap_ci(d, mean_y, spec);
  CHECK(first.values == second.values);
  spec.threads = 4;
  auto threaded = bootstrap_ci(d, mean_y, spec);
  CHECK(threaded.values == first.values);
  CHECK(threaded.low == first.low);
  CHECK(threaded.high == first.high);
  CHECK(first.low < first.high);
  spec.seed = 10;
  CHECK(bootstrap_ci(d, mean_y, spec).values != first.values);
}

TEST_CASE("bootstrap replicate count and failure accounting") {
  CHECK(minimum_replicates(0.95) == 40);
  CHECK(minimum_replicates(0.90) == 20);
  Dataset d({"y"}, {{0, 1, 1, 0, 1}});
  auto constant = [](const Dataset&) { return 1.0; };
  CHECK(code_of([&] { bootstrap_ci(d, constant, {39, 1, 0.95, 1}); }) ==
        ErrorCode::InsufficientReplicates);
  CHECK_NOTHROW(bootstrap_ci(d, constant, {40, 1, 0.95, 1}));

  std::atomic<int> calls{0};
  auto every_tenth = [&](const Dataset&) -> double {
    if (++calls % 10 == 0) throw Error(ErrorCode::NoConvergence, "synthetic");
    return 1.0;
  };
  auto r = bootstrap_ci(d, every_tenth, {50, 1, 0.95, 1});
  CHECK(r.failures == 5);
  CHECK(r.values.size() == 45);

  auto every_third = [&](const Dataset&) -> double {
    if (++calls % 3 == 0) throw Error(ErrorCode::NoConvergence, "synthetic");
    return 1.0;
  };
  calls = 0;
  CHECK(code_of([&] { bootstrap_ci(d, every_third, {60, 1, 0.95, 1}); }) ==
        ErrorCode::BootstrapDegenerate);
}

TEST_CASE("bootstrap intervals are attached to G-computation and IPW") {
  auto d = sample(fx::case_study_model(), 20'000, 77);
  BootstrapSpec spec{40, 3, 0.95, 0};
  auto g = g_computation_rr(d, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry}, false,
                            spec);
  CHECK(g.ci_method == CiMethod::bootstrap_percentile);
  CHECK(g.ci_low <= g.ci_high);
  CHECK(g.diagnostics.at("bootstrap_failures") == 0);
  CHECK(g.diagnostics.at("bootstrap_se") > 0);
  auto w = ipw_rr(d, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry}, spec);
  CHECK(w.ci_method == CiMethod::bootstrap_percentile);
  CHECK(w.diagnostics.count("propensity_model_converged") == 1);
  CHECK(w.diagnostics.count("outcome_model_max_fitted_mean") == 1);
}

TEST_CASE("population estimands") {
  auto m = fx::case_study_model();
  CHECK(std::abs(population_estimand(m, request(Method::outcome_regression,
                                                {fx::kConductEntry})) -
                 1.0) < 1e-8);
  auto confounder = request(Method::unadjusted, {});
  confounder.treatment = "A";
  confounder.outcome = "B";
  CHECK(population_estimand(fx::confounder_model(), confounder) ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(population_estimand(m, request(Method::ipw, {fx::kConductEntry, fx::kPlaygroup})) > 1.0);

  // The unadjusted estimand is the exact ratio of conditional risks.
  auto j = oracle::joint(m);
  double exact = j.conditional(fx::kConductSchool, {{fx::kChildcare, 1}}) /
                 j.conditional(fx::kConductSchool, {{fx::kChildcare, 0}});
  CHECK(population_estimand(m, request(Method::unadjusted, {})) ==
        doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("valid adjustment sets have a null population estimand") {
  auto m = fx::case_study_model();
  auto dag = fx::case_study_no_effect_dag();
  auto q = make_adjustment_query(dag, fx::kChildcare, fx::kConductSchool);
  std::vector<std::string> candidates(q.candidates.begin(), q.candidates.end());
  int valid = 0;
  for (const auto& set : oracle::subsets(candidates)) {
    std::vector<std::string> z(set.begin(), set.end());
    if (!is_valid_adjustment(dag, q, set)) continue;
    ++valid;
    CAPTURE(format_node_set(set));
    for (auto method : {Method::g_computation, Method::ipw, Method::outcome_regression}) {
      CHECK(std::abs(population_estimand(m, request(method, z)) - 1.0) < 1e-8);
    }
  }
  CHECK(valid > 0);

  // Under selection on the playgroup the forced node joins the conditioning set.
  SelectionRule sel{fx::kPlaygroup, 1};
  auto forced = make_adjustment_query(dag, fx::kChildcare, fx::kConductSchool, {fx::kPlaygroup});
  NodeSet both{fx::kConductEntry, fx::kParentEducation};
  REQUIRE(is_valid_adjustment(dag, forced, both));
  std::vector<std::string> z(both.begin(), both.end());
  CHECK(std::abs(population_estimand(m, request(Method::ipw, z), sel) - 1.0) < 1e-8);
}

TEST_CASE("null soundness under resampling") {
  auto m = fx::case_study_model();
  int covered_g = 0, covered_ipw = 0;
  const int runs = 20;
  for (int k = 0; k < runs; ++k) {
    auto d = sample(m, 100'000, 9000 + k);
    BootstrapSpec spec{60, std::uint64_t(k), 0.95, 0};
    auto g = g_computation_rr(d, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry}, false,
                              spec);
    auto w = ipw_rr(d, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry}, spec);
    covered_g += g.ci_low <= 1.0 && 1.0 <= g.ci_high;
    covered_ipw += w.ci_low <= 1.0 && 1.0 <= w.ci_high;
  }
  CHECK(covered_g >= 18);
  CHECK(covered_ipw >= 18);
}

TEST_CASE("G-computation and IPW agree on valid scenarios at a million rows") {
  auto m = fx::case_study_model();
  auto full = sample(m, 1'000'000, 31337);
  auto g = g_computation_rr(full, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry}, false,
                            {});
  auto w = ipw_rr(full, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry}, {});
  CHECK(std::abs(g.risk_ratio - w.risk_ratio) < 0.02);

  auto selected = apply_selection(full, {fx::kPlaygroup, 1});
  std::vector<std::string> z = {fx::kConductEntry, fx::kParentEducation};
  auto gs = g_computation_rr(selected, fx::kChildcare, fx::kConductSchool, z, false, {});
  auto ws = ipw_rr(selected, fx::kChildcare, fx::kConductSchool, z, {});
  CHECK(std::abs(gs.risk_ratio - ws.risk_ratio) < 0.02);
}

TEST_CASE("estimate dispatches by method") {
  const auto& d = case_study_sample();
  auto r = request(Method::outcome_regression, {fx::kConductEntry});
  auto e = estimate(d, r);
  CHECK(e.method == Method::outcome_regression);
  CHECK(e.adjustment == std::vector<std::string>{fx::kConductEntry});
  CHECK(e.ci_method == CiMethod::wald);
  CHECK(e.risk_ratio ==
        outcome_regression_rr(d, fx::kChildcare, fx::kConductSchool, {fx::kConductEntry})
            .risk_ratio);

  auto bad = request(Method::unadjusted, {fx::kConductEntry});
  CHECK(code_of([&] { estimate(d, bad); }) == ErrorCode::InvalidSpec);
  auto missing = request(Method::g_computation, {"nope"});
  CHECK(code_of([&] { estimate(d, missing); }) == ErrorCode::UnknownColumn);
  auto self = request(Method::g_computation, {fx::kChildcare});
  CHECK(code_of([&] { estimate(d, self); }) == ErrorCode::InvalidSpec);
  auto level = request(Method::unadjusted, {});
  level.level = 1.5;
  CHECK(code_of([&] { estimate(d, level); }) == ErrorCode::InvalidSpec);
  CHECK(parse_method("ipw") == Method::ipw);
  CHECK_FALSE(parse_method("magic"));
}

TEST_CASE("an adjuster that predicts treatment perfectly is reported") {
  auto d = sample(fx::case_study_model(), 5000, 5);
  std::vector<std::vector<std::uint8_t>> cols;
  std::vector<std::string> names = d.columns();
  for (const auto& n : names) {
    auto c = d.column(n);
    cols.emplace_back(c.begin(), c.end());
  }
  names.push_back("copy");
  auto c = d.column(fx::kChildcare);
  cols.emplace_back(c.begin(), c.end());
  Dataset with_copy(names, cols);
  CHECK(code_of([&] { ipw_rr(with_copy, fx::kChildcare, fx::kConductSchool, {"copy"}, {}); }) ==
        ErrorCode::SeparationSuspected);
  CHECK(code_of([&] {
          g_computation_rr(with_copy, fx::kChildcare, fx::kConductSchool, {"copy"}, false, {});
        }) == ErrorCode::RankDeficient);
}

}  // TEST_SUITE
