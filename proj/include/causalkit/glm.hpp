#pragma once

// Generalized linear models for binary responses, fitted by iteratively
// reweighted least squares (Fisher scoring):
//
//   binomial / logit   logistic regression
//   binomial / log     log-binomial regression (risk ratios)
//   poisson  / log     Poisson working model for risk ratios
//
// Weights multiply the log-likelihood contribution of each row, so integer
// weights behave exactly like duplicated rows.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "causalkit/dataset.hpp"

namespace causalkit {

enum class Family { binomial, poisson };
enum class Link { logit, log };

std::string_view to_string(Family family);
std::string_view to_string(Link link);

struct ModelSpec {
  std::string response;
  std::vector<std::string> terms;
  /// Products of two terms, each of which must also appear in `terms`.
  std::vector<std::pair<std::string, std::string>> interactions;
  Family family = Family::binomial;
  Link link = Link::logit;
  /// Extra per-row weights, multiplied into the dataset's own weights.
  std::optional<std::vector<double>> weights;
};

struct FitOptions {
  int max_iterations = 100;
  /// Bound on both the relative deviance change and the largest
  /// coefficient step.
  double tolerance = 1e-8;
  int max_halvings = 50;
  /// |coefficient| beyond this is reported as SeparationSuspected.
  double coefficient_bound = 30.0;
};

/// Fitted means of a log-binomial model are kept at or below this.
inline constexpr double kMaxBinomialMean = 1.0 - 1e-10;

struct GlmFit {
  ModelSpec spec;  // without weights
  /// "(Intercept)", terms, then "a:b" for each interaction.
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  /// Inverse expected information at the solution.
  Eigen::MatrixXd covariance;
  double deviance = 0.0;
  int iterations = 0;
  bool converged = false;
  double n_effective = 0.0;
  /// Total step halvings taken over all iterations.
  int step_halvings = 0;
  /// Largest fitted mean over positively weighted rows, at any accepted step.
  double max_fitted_mean = 0.0;

  /// Throws Error(UnknownTerm).
  std::size_t index_of(std::string_view name) const;
  double coefficient(std::string_view name) const;
  double std_error(std::string_view name) const;
};

/// Throws Error(InvalidSpec | UnknownColumn | RankDeficient | NoConvergence |
/// SeparationSuspected).
GlmFit fit(const Dataset& data, const ModelSpec& spec, const FitOptions& options = {});

/// Inverse link of the linear predictor for each row. `overrides` pins
/// columns to a value for every row (e.g. {treatment: 1}).
std::vector<double> predict(const GlmFit& fit, const Dataset& rows,
                            const std::map<std::string, int>& overrides = {});

/// exp(theta +/- z * se) for a two-sided interval at `level`.
std::pair<double, double> wald_interval(const GlmFit& fit, std::string_view term,
                                        double level = 0.95);

/// Two-sided standard normal critical value for `level`.
double normal_critical_value(double level);

/// Coefficients, covariance and convergence diagnostics as a JSON object.
std::string to_json(const GlmFit& fit);

}  // namespace causalkit
