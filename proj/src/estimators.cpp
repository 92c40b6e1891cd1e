#include "causalkit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include "causalkit/error.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::unadjusted: return "unadjusted";
    case Method::outcome_regression: return "outcome_regression";
    case Method::g_computation: return "g_computation";
    case Method::ipw: return "ipw";
  }
  return "unadjusted";
}

std::string_view to_string(CiMethod method) {
  switch (method) {
    case CiMethod::none: return "none";
    case CiMethod::wald: return "wald";
    case CiMethod::bootstrap_percentile: return "bootstrap_percentile";
  }
  return "none";
}

std::optional<Method> parse_method(std::string_view text) {
  for (Method m : {Method::unadjusted, Method::outcome_regression, Method::g_computation,
                   Method::ipw}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

std::string_view display_name(Method method) {
  switch (method) {
    case Method::unadjusted: return "No adjustment";
    case Method::outcome_regression: return "Outcome regression";
    case Method::g_computation: return "G-computation";
    case Method::ipw: return "IPW";
  }
  return "";
}

namespace {

// Propensities this close to 0 or 1 make the inverse weights meaningless.
constexpr double kPropensityFloor = 1e-12;

std::vector<std::string> analysis_columns(const std::string& treatment,
                                          const std::string& outcome,
                                          const std::vector<std::string>& adjust) {
  if (treatment == outcome) {
    throw Error(ErrorCode::InvalidSpec, "treatment and outcome must differ");
  }
  std::vector<std::string> cols{treatment, outcome};
  std::set<std::string> seen(cols.begin(), cols.end());
  for (const auto& a : adjust) {
    if (!seen.insert(a).second) {
      throw Error(ErrorCode::InvalidSpec,
                  "adjustment variable '" + a + "' repeats the treatment, outcome or itself");
    }
    cols.push_back(a);
  }
  return cols;
}

Dataset compact(const Dataset& data, const std::vector<std::string>& cols) {
  return compress_rows(data.select_columns(cols)).patterns;
}

double weighted_mean(const Dataset& rows, const std::vector<double>& values) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    num += rows.weight(r) * values[r];
    den += rows.weight(r);
  }
  return num / den;
}

struct ArmRisks {
  double treated_weight = 0, control_weight = 0;
  double treated_risk = 0, control_risk = 0;
};

ArmRisks arm_risks(const Dataset& rows, const std::string& treatment,
                   const std::string& outcome) {
  auto a = rows.column(treatment);
  auto y = rows.column(outcome);
  ArmRisks out;
  double treated_events = 0, control_events = 0;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    double w = rows.weight(r);
    (a[r] ? out.treated_weight : out.control_weight) += w;
    (a[r] ? treated_events : control_events) += w * y[r];
  }
  if (!(out.treated_weight > 0) || !(out.control_weight > 0)) {
    throw Error(ErrorCode::DegenerateArm, "treatment '" + treatment + "' has an empty arm");
  }
  out.treated_risk = treated_events / out.treated_weight;
  out.control_risk = control_events / out.control_weight;
  if (!(out.control_risk > 0)) {
    throw Error(ErrorCode::ZeroRiskControlArm,
                "outcome '" + outcome + "' never occurs in the control arm");
  }
  if (!(out.treated_risk > 0)) {
    throw Error(ErrorCode::DegenerateArm,
                "outcome '" + outcome + "' never occurs in the treated arm");
  }
  return out;
}

void record_fit(std::map<std::string, double>& diag, const std::string& prefix,
                const GlmFit& f) {
  diag[prefix + "iterations"] = f.iterations;
  diag[prefix + "step_halvings"] = f.step_halvings;
  diag[prefix + "max_fitted_mean"] = f.max_fitted_mean;
  diag[prefix + "converged"] = f.converged ? 1.0 : 0.0;
}

struct Point {
  double risk_ratio;
  std::map<std::string, double> diagnostics;
};

Point g_computation_point(const Dataset& rows, const std::string& treatment,
                          const std::string& outcome, const std::vector<std::string>& adjust,
                          bool interactions) {
  ModelSpec spec;
  spec.response = outcome;
  spec.terms.push_back(treatment);
  spec.terms.insert(spec.terms.end(), adjust.begin(), adjust.end());
  if (interactions) {
    for (const auto& a : adjust) spec.interactions.emplace_back(treatment, a);
  }
  spec.family = Family::binomial;
  spec.link = Link::logit;
  auto f = fit(rows, spec);
  const double treated = weighted_mean(rows, predict(f, rows, {{treatment, 1}}));
  const double control = weighted_mean(rows, predict(f, rows, {{treatment, 0}}));
  if (!(control > 0)) {
    throw Error(ErrorCode::ZeroRiskControlArm, "standardized control risk is zero");
  }
  Point out{treated / control, {}};
  out.diagnostics["risk_treated"] = treated;
  out.diagnostics["risk_control"] = control;
  record_fit(out.diagnostics, "outcome_model_", f);
  return out;
}

Point ipw_point(const Dataset& rows, const std::string& treatment, const std::string& outcome,
                const std::vector<std::string>& adjust, Family family) {
  ModelSpec ps;
  ps.response = treatment;
  ps.terms = adjust;
  ps.family = Family::binomial;
  ps.link = Link::logit;
  auto propensity_fit = fit(rows, ps);
  auto propensity = predict(propensity_fit, rows);

  auto a = rows.column(treatment);
  std::vector<double> weights(rows.rows());
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const double p = propensity[r];
    if (rows.weight(r) > 0 && (p < kPropensityFloor || p > 1.0 - kPropensityFloor)) {
      throw Error(ErrorCode::PropensityAtBound,
                  "estimated propensity " + std::to_string(p) + " is at the boundary");
    }
    weights[r] = a[r] ? 1.0 / p : 1.0 / (1.0 - p);
    if (rows.weight(r) > 0) {
      lo = std::min(lo, weights[r]);
      hi = std::max(hi, weights[r]);
    }
  }

  ModelSpec om;
  om.response = outcome;
  om.terms = {treatment};
  om.family = family;
  om.link = Link::log;
  om.weights = std::move(weights);
  auto outcome_fit = fit(rows, om);

  Point out{std::exp(outcome_fit.coefficient(treatment)), {}};
  out.diagnostics["min_weight"] = lo;
  out.diagnostics["max_weight"] = hi;
  record_fit(out.diagnostics, "propensity_model_", propensity_fit);
  record_fit(out.diagnostics, "outcome_model_", outcome_fit);
  return out;
}

EffectEstimate base_estimate(Method method, const Dataset& data, const std::string& treatment,
                             const std::string& outcome, const std::vector<std::string>& adjust) {
  EffectEstimate e;
  e.method = method;
  e.treatment = treatment;
  e.outcome = outcome;
  e.adjustment = adjust;
  e.n = data.rows();
  return e;
}

void attach_bootstrap(EffectEstimate& e, const Dataset& data, const std::vector<std::string>& cols,
                      const Statistic& statistic, const std::optional<BootstrapSpec>& bootstrap) {
  if (!bootstrap) {
    e.ci_low = e.ci_high = e.risk_ratio;
    e.ci_method = CiMethod::none;
    return;
  }
  auto result = bootstrap_ci(data.select_columns(cols), statistic, *bootstrap);
  e.ci_low = result.low;
  e.ci_high = result.high;
  e.ci_method = CiMethod::bootstrap_percentile;
  e.diagnostics["bootstrap_replicates"] = static_cast<double>(bootstrap->replicates);
  e.diagnostics["bootstrap_failures"] = static_cast<double>(result.failures);
  e.diagnostics["bootstrap_se"] = result.se;
}

}  // namespace

EffectEstimate unadjusted_rr(const Dataset& data, const std::string& treatment,
                             const std::string& outcome, Family family, double level) {
  auto cols = analysis_columns(treatment, outcome, {});
  auto rows = compact(data, cols);
  auto risks = arm_risks(rows, treatment, outcome);

  auto e = base_estimate(Method::unadjusted, data, treatment, outcome, {});
  e.risk_ratio = risks.treated_risk / risks.control_risk;

  ModelSpec spec{outcome, {treatment}, {}, family, Link::log, std::nullopt};
  auto f = fit(rows, spec);
  auto [lo, hi] = wald_interval(f, treatment, level);
  e.ci_low = lo;
  e.ci_high = hi;
  e.ci_method = CiMethod::wald;
  e.diagnostics["risk_treated"] = risks.treated_risk;
  e.diagnostics["risk_control"] = risks.control_risk;
  e.diagnostics["fit_risk_ratio"] = std::exp(f.coefficient(treatment));
  e.diagnostics["log_se"] = f.std_error(treatment);
  record_fit(e.diagnostics, "", f);
  return e;
}

EffectEstimate outcome_regression_rr(const Dataset& data, const std::string& treatment,
                                     const std::string& outcome,
                                     const std::vector<std::string>& adjust, Family family,
                                     double level) {
  auto cols = analysis_columns(treatment, outcome, adjust);
  auto rows = compact(data, cols);
  arm_risks(rows, treatment, outcome);

  ModelSpec spec;
  spec.response = outcome;
  spec.terms.push_back(treatment);
  spec.terms.insert(spec.terms.end(), adjust.begin(), adjust.end());
  spec.family = family;
  spec.link = Link::log;
  auto f = fit(rows, spec);

  auto e = base_estimate(Method::outcome_regression, data, treatment, outcome, adjust);
  e.risk_ratio = std::exp(f.coefficient(treatment));
  auto [lo, hi] = wald_interval(f, treatment, level);
  e.ci_low = lo;
  e.ci_high = hi;
  e.ci_method = CiMethod::wald;
  e.diagnostics["log_se"] = f.std_error(treatment);
  record_fit(e.diagnostics, "", f);
  return e;
}

EffectEstimate g_computation_rr(const Dataset& data, const std::string& treatment,
                                const std::string& outcome,
                                const std::vector<std::string>& adjust, bool interactions,
                                const std::optional<BootstrapSpec>& bootstrap) {
  auto cols = analysis_columns(treatment, outcome, adjust);
  auto rows = compact(data, cols);
  arm_risks(rows, treatment, outcome);
  auto point = g_computation_point(rows, treatment, outcome, adjust, interactions);

  auto e = base_estimate(Method::g_computation, data, treatment, outcome, adjust);
  e.risk_ratio = point.risk_ratio;
  e.diagnostics = point.diagnostics;
  if (interactions) e.diagnostics["interactions"] = 1.0;
  attach_bootstrap(
      e, data, cols,
      [&](const Dataset& sample) {
        auto r = compress_rows(sample).patterns;
        arm_risks(r, treatment, outcome);
        return g_computation_point(r, treatment, outcome, adjust, interactions).risk_ratio;
      },
      bootstrap);
  return e;
}

EffectEstimate ipw_rr(const Dataset& data, const std::string& treatment,
                      const std::string& outcome, const std::vector<std::string>& adjust,
                      const std::optional<BootstrapSpec>& bootstrap, Family family) {
  auto cols = analysis_columns(treatment, outcome, adjust);
  auto rows = compact(data, cols);
  arm_risks(rows, treatment, outcome);
  auto point = ipw_point(rows, treatment, outcome, adjust, family);

  auto e = base_estimate(Method::ipw, data, treatment, outcome, adjust);
  e.risk_ratio = point.risk_ratio;
  e.diagnostics = point.diagnostics;
  attach_bootstrap(
      e, data, cols,
      [&](const Dataset& sample) {
        auto r = compress_rows(sample).patterns;
        arm_risks(r, treatment, outcome);
        return ipw_point(r, treatment, outcome, adjust, family).risk_ratio;
      },
      bootstrap);
  return e;
}

EffectEstimate estimate(const Dataset& data, const AnalysisRequest& request) {
  switch (request.method) {
    case Method::unadjusted:
      if (!request.adjust.empty()) {
        throw Error(ErrorCode::InvalidSpec, "the unadjusted estimator takes no adjustment set");
      }
      return unadjusted_rr(data, request.treatment, request.outcome, request.family,
                           request.level);
    case Method::outcome_regression:
      return outcome_regression_rr(data, request.treatment, request.outcome, request.adjust,
                                   request.family, request.level);
    case Method::g_computation:
      return g_computation_rr(data, request.treatment, request.outcome, request.adjust,
                              request.interactions, request.bootstrap);
    case Method::ipw:
      return ipw_rr(data, request.treatment, request.outcome, request.adjust, request.bootstrap,
                    request.family);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown method");
}

std::size_t minimum_replicates(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "confidence level must be in (0, 1)");
  }
  return static_cast<std::size_t>(std::ceil(2.0 / (1.0 - level) - 1e-9));
}

BootstrapResult bootstrap_ci(const Dataset& data, const Statistic& statistic,
                             const BootstrapSpec& spec) {
  const std::size_t needed = minimum_replicates(spec.level);
  if (spec.replicates < 1 || spec.replicates < needed) {
    throw Error(ErrorCode::InsufficientReplicates,
                std::to_string(spec.replicates) + " replicates; a " +
                    std::to_string(spec.level) + " percentile interval needs at least " +
                    std::to_string(needed));
  }
  if (data.rows() == 0) throw Error(ErrorCode::InvalidDataset, "cannot bootstrap zero rows");

  const auto compressed = compress_rows(data);
  const std::size_t n = data.rows();
  const std::size_t patterns = compressed.patterns.rows();
  const std::size_t replicates = spec.replicates;
  std::vector<std::optional<double>> values(replicates);

  auto run = [&](std::size_t i) {
    Xoshiro256ss rng(mix(spec.seed, i));
    std::vector<double> counts(patterns, 0.0);
    for (std::size_t draw = 0; draw < n; ++draw) {
      auto row = static_cast<std::size_t>(rng.below(n));
      counts[compressed.row_pattern[row]] += data.weight(row);
    }
    try {
      double v = statistic(compressed.patterns.with_weights(std::move(counts)));
      if (std::isfinite(v)) values[i] = v;
    } catch (const Error&) {
    }
  };

  unsigned threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                       : spec.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, replicates));
  if (threads <= 1) {
    for (std::size_t i = 0; i < replicates; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < replicates; i += threads) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  BootstrapResult out;
  for (const auto& v : values) {
    if (v) {
      out.values.push_back(*v);
    } else {
      ++out.failures;
    }
  }
  if (out.failures * 5 > replicates || out.values.empty()) {
    throw Error(ErrorCode::BootstrapDegenerate,
                std::to_string(out.failures) + " of " + std::to_string(replicates) +
                    " bootstrap replicates failed");
  }
  std::vector<double> sorted = out.values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  auto nearest_rank = [&](double q) {
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(m) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, m);
    return sorted[rank - 1];
  };
  const double alpha = 1.0 - spec.level;
  out.low = nearest_rank(alpha / 2.0);
  out.high = nearest_rank(1.0 - alpha / 2.0);

  double mean = 0.0;
  for (double v : out.values) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : out.values) ss += (v - mean) * (v - mean);
  out.se = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
  return out;
}

double population_estimand(const StructuralModel& model, const AnalysisRequest& request,
                           const std::optional<SelectionRule>& selection) {
  auto population = enumerate_population(model, selection);
  AnalysisRequest exact = request;
  exact.bootstrap.reset();
  return estimate(population, exact).risk_ratio;
}

}  // namespace causalkit
