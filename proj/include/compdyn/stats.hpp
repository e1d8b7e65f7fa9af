#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "compdyn/parallel.hpp"

namespace compdyn {

/// Quasi-binomial GLM with logit link. Coefficient 0 is the intercept when
/// one is fitted; names follow the same order.
struct GlmFit {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_values;
  double dispersion = 0.0;  // Pearson chi^2 / (n - p); NaN when n == p
  double null_deviance = 0.0;
  double residual_deviance = 0.0;
  bool converged = false;
  int n_iter = 0;
  bool intercept = true;
};

struct GlmOptions {
  bool intercept = true;
  std::vector<std::string> names;  // one per feature column; default x1, x2, ...
  Eigen::VectorXd weights;         // prior weights; empty means all ones
  double tol = 1e-10;              // relative change in deviance
  int max_iter = 100;
};

/// IRLS fit. Features are the columns of X (no intercept column). Throws
/// ValidationError for y outside [0, 1], bad weights or a rank-deficient
/// design (naming the dependent columns).
GlmFit fit_quasibinomial(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GlmOptions& opt = {});

// Binomial deviance with 0 * log(0) = 0.
double binomial_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, const Eigen::VectorXd& w);

// Fitted means for the features X under fit (intercept added as fitted).
Eigen::VectorXd glm_predict(const GlmFit& fit, const Eigen::MatrixXd& X);

struct DevianceRow {
  std::string term;
  double deviance = 0.0;           // reduction when the term is added
  double residual_deviance = 0.0;  // after adding it
  double percent = 0.0;            // share of null - full reduction
};

/// Sequential (type I) analysis of deviance, adding features in `order`
/// (all columns in index order when empty) after the intercept.
std::vector<DevianceRow> deviance_anova(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GlmOptions& opt = {},
                                        std::vector<int> order = {});

/// Mean drop of the score 1 - deviance / null deviance when one feature
/// column is shuffled, with the coefficients held fixed. Repeat r of feature
/// j shuffles with derive_seed(seed, {permutation, j, r}).
std::vector<double> permutation_importance(const GlmFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                           int n_repeats, std::uint64_t seed, const Eigen::VectorXd& weights = {},
                                           Parallelism par = {});
std::vector<double> permutation_importance_serial(const GlmFit& fit, const Eigen::MatrixXd& X,
                                                  const Eigen::VectorXd& y, int n_repeats, std::uint64_t seed,
                                                  const Eigen::VectorXd& weights = {});

/// Numeric table read from CSV for the regression: feature columns, the
/// response and optional prior weights.
struct GlmTable {
  std::vector<std::string> names;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd weights;  // empty unless a weight column was named
};

/// Reads a CSV with a header. Columns in `drop` are ignored; rows whose
/// response is "nan" are skipped (failed design points). Every other
/// column is a feature. Defaults match the design log.
GlmTable read_glm_table(std::istream& is, const std::string& response = "basin",
                        const std::vector<std::string>& drop = {"iter", "source", "objective"},
                        const std::optional<std::string>& weight_column = std::nullopt);

// "term,Estimate,Std. Error,t-value,Deviance%"; the intercept has no deviance share.
void write_coefficient_table(std::ostream& os, const GlmFit& fit, const std::vector<DevianceRow>& anova);

}  // namespace compdyn
