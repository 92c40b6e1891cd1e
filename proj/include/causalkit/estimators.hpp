#pragma once

// Risk-ratio estimators for a binary treatment and binary outcome.
//
//   unadjusted          ratio of outcome risks between arms
//   outcome_regression  exp(theta_treatment) of log-link regression of the
//                       outcome on treatment + adjusters
//   g_computation       logistic outcome model, predicted risk with everyone
//                       treated over predicted risk with no one treated
//   ipw                 logistic propensity model, inverse-probability
//                       weighted log-binomial regression on treatment alone
//
// All estimators work on compressed (distinct-row) data internally, so a
// million sampled rows cost the same as the handful of patterns they contain.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causalkit/dataset.hpp"
#include "causalkit/glm.hpp"
#include "causalkit/scm.hpp"

namespace causalkit {

enum class Method { unadjusted, outcome_regression, g_computation, ipw };
enum class CiMethod { none, wald, bootstrap_percentile };

std::string_view to_string(Method method);
std::string_view to_string(CiMethod method);
std::optional<Method> parse_method(std::string_view text);
/// "No adjustment", "Outcome regression", "G-computation", "IPW".
std::string_view display_name(Method method);

struct BootstrapSpec {
  std::size_t replicates = 200;
  std::uint64_t seed = 0;
  double level = 0.95;
  /// Worker threads; 0 uses the hardware concurrency. Results do not depend
  /// on this.
  unsigned threads = 1;
};

struct EffectEstimate {
  Method method = Method::unadjusted;
  std::string treatment;
  std::string outcome;
  std::vector<std::string> adjustment;
  double risk_ratio = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  CiMethod ci_method = CiMethod::none;
  std::size_t n = 0;
  /// e.g. min_weight, max_weight, max_fitted_mean, bootstrap_failures,
  /// bootstrap_se, log_se.
  std::map<std::string, double> diagnostics;
};

struct AnalysisRequest {
  Method method = Method::unadjusted;
  std::string treatment;
  std::string outcome;
  std::vector<std::string> adjust;
  /// Treatment-by-adjuster product terms in the G-computation outcome model.
  bool interactions = false;
  /// Family of the log-link models (outcome regression, unadjusted
  /// cross-check, IPW outcome step).
  Family family = Family::binomial;
  /// Confidence level for Wald intervals.
  double level = 0.95;
  /// Bootstrap settings for G-computation and IPW; no interval when absent.
  std::optional<BootstrapSpec> bootstrap;
  /// Free-text row label for reports.
  std::string label;
};

EffectEstimate unadjusted_rr(const Dataset& data, const std::string& treatment,
                             const std::string& outcome, Family family = Family::binomial,
                             double level = 0.95);

EffectEstimate outcome_regression_rr(const Dataset& data, const std::string& treatment,
                                     const std::string& outcome,
                                     const std::vector<std::string>& adjust,
                                     Family family = Family::binomial, double level = 0.95);

EffectEstimate g_computation_rr(const Dataset& data, const std::string& treatment,
                                const std::string& outcome,
                                const std::vector<std::string>& adjust, bool interactions,
                                const std::optional<BootstrapSpec>& bootstrap);

EffectEstimate ipw_rr(const Dataset& data, const std::string& treatment,
                      const std::string& outcome, const std::vector<std::string>& adjust,
                      const std::optional<BootstrapSpec>& bootstrap,
                      Family family = Family::binomial);

/// Runs the method named in the request.
EffectEstimate estimate(const Dataset& data, const AnalysisRequest& request);

using Statistic = std::function<double(const Dataset&)>;

struct BootstrapResult {
  double low = 0.0;
  double high = 0.0;
  /// Standard deviation of the successful replicates.
  double se = 0.0;
  std::size_t failures = 0;
  /// Successful replicate values in replicate order.
  std::vector<double> values;
};

/// Nonparametric bootstrap: replicate i resamples rows with replacement using
/// Xoshiro256** seeded with mix(spec.seed, i). The resample is handed to the
/// statistic as distinct rows weighted by how often (times the row weight)
/// each was drawn. Interval endpoints use the nearest-rank percentile rule.
/// Replicates whose statistic throws are dropped; more than 20% dropped
/// raises BootstrapDegenerate.
BootstrapResult bootstrap_ci(const Dataset& data, const Statistic& statistic,
                             const BootstrapSpec& spec);

/// Fewest replicates for which both percentile ranks fall inside the sample.
std::size_t minimum_replicates(double level);

/// The estimator applied to the exact probability-weighted joint
/// distribution: its large-sample limit, free of sampling noise.
double population_estimand(const StructuralModel& model, const AnalysisRequest& request,
                           const std::optional<SelectionRule>& selection = std::nullopt);

}  // namespace causalkit
