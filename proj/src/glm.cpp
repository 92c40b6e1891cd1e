#include "causalkit/glm.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <set>

#include <json.hpp>

#include "causalkit/error.hpp"

namespace causalkit {

std::string_view to_string(Family family) {
  return family == Family::binomial ? "binomial" : "poisson";
}

std::string_view to_string(Link link) { return link == Link::logit ? "logit" : "log"; }

std::size_t GlmFit::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw Error(ErrorCode::UnknownTerm, "model has no term '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - names.begin());
}

double GlmFit::coefficient(std::string_view name) const { return coefficients(index_of(name)); }

double GlmFit::std_error(std::string_view name) const {
  auto j = index_of(name);
  return std::sqrt(std::max(0.0, covariance(j, j)));
}

namespace {

void check_spec(const ModelSpec& spec) {
  if (spec.link == Link::logit && spec.family != Family::binomial) {
    throw Error(ErrorCode::InvalidSpec, "logit link requires the binomial family");
  }
  std::set<std::string> terms;
  for (const auto& t : spec.terms) {
    if (t == spec.response) {
      throw Error(ErrorCode::InvalidSpec, "response '" + t + "' also listed as a term");
    }
    if (!terms.insert(t).second) {
      throw Error(ErrorCode::InvalidSpec, "term '" + t + "' listed twice");
    }
  }
  for (const auto& [a, b] : spec.interactions) {
    if (!terms.count(a) || !terms.count(b) || a == b) {
      throw Error(ErrorCode::InvalidSpec,
                  "interaction " + a + ":" + b + " needs two distinct listed terms");
    }
  }
}

std::vector<std::string> coefficient_names(const ModelSpec& spec) {
  std::vector<std::string> names{"(Intercept)"};
  names.insert(names.end(), spec.terms.begin(), spec.terms.end());
  for (const auto& [a, b] : spec.interactions) names.push_back(a + ":" + b);
  return names;
}

Eigen::MatrixXd design_matrix(const Dataset& data, const ModelSpec& spec,
                              const std::map<std::string, int>& overrides,
                              ErrorCode missing) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  const auto p = static_cast<Eigen::Index>(1 + spec.terms.size() + spec.interactions.size());
  Eigen::MatrixXd x(n, p);
  x.col(0).setOnes();
  auto fill = [&](Eigen::Index j, const std::string& name) {
    if (auto it = overrides.find(name); it != overrides.end()) {
      x.col(j).setConstant(it->second);
      return;
    }
    if (!data.has_column(name)) {
      throw Error(missing, "data has no column '" + name + "'");
    }
    auto col = data.column(name);
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = col[static_cast<std::size_t>(i)];
  };
  Eigen::Index j = 1;
  for (const auto& t : spec.terms) fill(j++, t);
  for (const auto& [a, b] : spec.interactions) {
    auto ia = 1 + (std::find(spec.terms.begin(), spec.terms.end(), a) - spec.terms.begin());
    auto ib = 1 + (std::find(spec.terms.begin(), spec.terms.end(), b) - spec.terms.begin());
    x.col(j++) = x.col(ia).cwiseProduct(x.col(ib));
  }
  return x;
}

double inverse_link(Link link, double eta) {
  return link == Link::logit ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta);
}

// d mu / d eta
double mean_derivative(Link link, double mu) {
  return link == Link::logit ? mu * (1.0 - mu) : mu;
}

double variance(Family family, double mu) {
  return family == Family::binomial ? mu * (1.0 - mu) : mu;
}

double deviance_of(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                   const Eigen::VectorXd& w) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (w(i) == 0.0) continue;
    if (family == Family::binomial) {
      dev -= 2.0 * w(i) * (y(i) > 0 ? std::log(mu(i)) : std::log1p(-mu(i)));
    } else {
      dev += 2.0 * w(i) * (mu(i) - (y(i) > 0 ? y(i) * (1.0 + std::log(mu(i))) : 0.0));
    }
  }
  return dev;
}

struct Evaluation {
  Eigen::VectorXd mu;
  double deviance;
  double max_mean;
  bool feasible;
};

Evaluation evaluate(const ModelSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& w, const Eigen::VectorXd& beta) {
  Evaluation ev{(x * beta).unaryExpr([&](double eta) { return inverse_link(spec.link, eta); }),
                0.0, 0.0, true};
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (w(i) == 0.0) continue;
    ev.max_mean = std::max(ev.max_mean, ev.mu(i));
    bool ok = std::isfinite(ev.mu(i)) && ev.mu(i) > 0.0;
    if (spec.family == Family::binomial) {
      ok = ok && ev.mu(i) < 1.0 &&
           (spec.link == Link::logit || ev.mu(i) <= kMaxBinomialMean);
    }
    if (!ok) {
      ev.feasible = false;
      return ev;
    }
  }
  ev.deviance = deviance_of(spec.family, y, ev.mu, w);
  ev.feasible = std::isfinite(ev.deviance);
  return ev;
}

// Weighted Gram matrix and right-hand side of one scoring step.
void normal_equations(const ModelSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                      const Eigen::VectorXd& mu, Eigen::MatrixXd& gram, Eigen::VectorXd& rhs) {
  const auto p = x.cols();
  gram.setZero(p, p);
  rhs.setZero(p);
  Eigen::VectorXd eta = x * beta;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (w(i) == 0.0) continue;
    double d = mean_derivative(spec.link, mu(i));
    double working = w(i) * d * d / variance(spec.family, mu(i));
    double z = eta(i) + (y(i) - mu(i)) / d;
    auto row = x.row(i);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(row.transpose(), working);
    rhs.noalias() += (working * z) * row.transpose();
  }
  gram = gram.selfadjointView<Eigen::Lower>();
}

// Rank-revealing solve; singular systems are an error rather than a pseudo-inverse.
Eigen::ColPivHouseholderQR<Eigen::MatrixXd> factor(const Eigen::MatrixXd& gram,
                                                   const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
  qr.setThreshold(1e-11);
  if (qr.rank() < gram.cols()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::RankDeficient,
                "design has rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(gram.cols()) + " columns (" + list + ")");
  }
  return qr;
}

}  // namespace

GlmFit fit(const Dataset& data, const ModelSpec& spec, const FitOptions& options) {
  check_spec(spec);
  GlmFit out;
  out.spec = spec;
  out.spec.weights.reset();
  out.names = coefficient_names(spec);

  const auto x = design_matrix(data, spec, {}, ErrorCode::UnknownColumn);
  const auto n = x.rows();
  Eigen::VectorXd y(n);
  {
    auto col = data.column(spec.response);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = col[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd w(n);
  if (spec.weights && spec.weights->size() != data.rows()) {
    throw Error(ErrorCode::InvalidSpec, "external weight vector has wrong length");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double wi = data.weight(static_cast<std::size_t>(i));
    if (spec.weights) wi *= (*spec.weights)[static_cast<std::size_t>(i)];
    if (!std::isfinite(wi) || wi < 0) throw Error(ErrorCode::InvalidSpec, "invalid row weight");
    w(i) = wi;
  }
  out.n_effective = w.sum();
  if (!(out.n_effective > 0)) throw Error(ErrorCode::RankDeficient, "no positively weighted rows");

  const double ybar = w.dot(y) / out.n_effective;
  if (ybar <= 0.0 || (spec.family == Family::binomial && ybar >= 1.0)) {
    throw Error(ErrorCode::SeparationSuspected,
                "response '" + spec.response + "' is constant on the weighted rows");
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  beta(0) = spec.link == Link::logit ? std::log(ybar / (1.0 - ybar)) : std::log(ybar);

  Evaluation current = evaluate(spec, x, y, w, beta);
  if (!current.feasible) {
    throw Error(ErrorCode::NoConvergence, "starting values are infeasible");
  }
  out.max_fitted_mean = current.max_mean;

  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    normal_equations(spec, x, y, w, beta, current.mu, gram, rhs);
    Eigen::VectorXd target = factor(gram, out.names).solve(rhs);
    Eigen::VectorXd step = target - beta;

    // Halve the step until the means are admissible and the deviance does not rise.
    double scale = 1.0;
    Evaluation next;
    Eigen::VectorXd candidate;
    int halvings = 0;
    while (true) {
      candidate = beta + scale * step;
      next = evaluate(spec, x, y, w, candidate);
      bool accept = next.feasible &&
                    next.deviance <= current.deviance + 1e-12 * (std::abs(current.deviance) + 1.0);
      if (accept) break;
      if (halvings == options.max_halvings) {
        throw Error(ErrorCode::NoConvergence,
                    "step halving failed to find an admissible step at iteration " +
                        std::to_string(iter));
      }
      scale *= 0.5;
      ++halvings;
    }
    out.step_halvings += halvings;
    out.max_fitted_mean = std::max(out.max_fitted_mean, next.max_mean);

    const double max_step = (candidate - beta).cwiseAbs().maxCoeff();
    const double rel_change =
        std::abs(next.deviance - current.deviance) / (std::abs(next.deviance) + 0.1);
    beta = candidate;
    current = std::move(next);
    out.iterations = iter;

    if (beta.cwiseAbs().maxCoeff() > options.coefficient_bound) {
      throw Error(ErrorCode::SeparationSuspected,
                  "coefficients diverging (|theta| > " +
                      std::to_string(options.coefficient_bound) + ") for response '" +
                      spec.response + "'");
    }
    if (rel_change < options.tolerance && max_step < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    throw Error(ErrorCode::NoConvergence,
                "no convergence in " + std::to_string(options.max_iterations) + " iterations");
  }

  normal_equations(spec, x, y, w, beta, current.mu, gram, rhs);
  auto qr = factor(gram, out.names);
  out.covariance = qr.solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  out.coefficients = beta;
  out.deviance = current.deviance;
  return out;
}

std::vector<double> predict(const GlmFit& fit, const Dataset& rows,
                            const std::map<std::string, int>& overrides) {
  auto x = design_matrix(rows, fit.spec, overrides, ErrorCode::MissingColumn);
  Eigen::VectorXd eta = x * fit.coefficients;
  std::vector<double> out(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    out[static_cast<std::size_t>(i)] = inverse_link(fit.spec.link, eta(i));
  }
  return out;
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "confidence level must be in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(),
                               1.0 - (1.0 - level) / 2.0);
}

std::pair<double, double> wald_interval(const GlmFit& fit, std::string_view term, double level) {
  if (!fit.converged) throw Error(ErrorCode::NotConverged, "fit did not converge");
  const double theta = fit.coefficient(term);
  const double half = normal_critical_value(level) * fit.std_error(term);
  return {std::exp(theta - half), std::exp(theta + half)};
}

std::string to_json(const GlmFit& f) {
  nlohmann::ordered_json doc;
  doc["response"] = f.spec.response;
  doc["family"] = std::string(to_string(f.spec.family));
  doc["link"] = std::string(to_string(f.spec.link));
  nlohmann::ordered_json coef = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < f.names.size(); ++i) coef[f.names[i]] = f.coefficients[i];
  doc["coefficients"] = coef;
  doc["names"] = f.names;
  nlohmann::ordered_json cov = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < f.covariance.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < f.covariance.cols(); ++c) row.push_back(f.covariance(r, c));
    cov.push_back(row);
  }
  doc["covariance"] = cov;
  doc["deviance"] = f.deviance;
  doc["iterations"] = f.iterations;
  doc["converged"] = f.converged;
  doc["n_effective"] = f.n_effective;
  doc["step_halvings"] = f.step_halvings;
  doc["max_fitted_mean"] = f.max_fitted_mean;
  return doc.dump(2);
}

}  // namespace causalkit
