#include "compdyn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "compdyn/errors.hpp"
#include "compdyn/rng.hpp"

namespace compdyn {

namespace {

constexpr double kMuClip = 1e-10;

double xlogy_ratio(double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); }

Eigen::VectorXd logistic(const Eigen::VectorXd& eta) {
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double m = 1.0 / (1.0 + std::exp(-eta(i)));
    mu(i) = std::clamp(m, kMuClip, 1.0 - kMuClip);
  }
  return mu;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X, bool intercept) {
  if (!intercept) return X;
  Eigen::MatrixXd D(X.rows(), X.cols() + 1);
  D.col(0).setOnes();
  D.rightCols(X.cols()) = X;
  return D;
}

Eigen::VectorXd resolve_weights(const Eigen::VectorXd& w, Eigen::Index n) {
  if (w.size() == 0) return Eigen::VectorXd::Ones(n);
  if (w.size() != n) throw ValidationError("glm: one weight per observation required");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(w(i) >= 0.0) || !std::isfinite(w(i))) throw ValidationError("glm: weights must be finite and >= 0");
  return w;
}

std::vector<std::string> term_names(const GlmOptions& opt, Eigen::Index features) {
  std::vector<std::string> names;
  if (opt.intercept) names.emplace_back("(Intercept)");
  if (!opt.names.empty()) {
    if (static_cast<Eigen::Index>(opt.names.size()) != features)
      throw ValidationError("glm: one name per feature column required");
    names.insert(names.end(), opt.names.begin(), opt.names.end());
  } else {
    for (Eigen::Index j = 0; j < features; ++j) names.push_back("x" + std::to_string(j + 1));
  }
  return names;
}

}  // namespace

double binomial_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, const Eigen::VectorXd& w) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    d += w(i) * (xlogy_ratio(y(i), mu(i)) + xlogy_ratio(1.0 - y(i), 1.0 - mu(i)));
  return 2.0 * d;
}

GlmFit fit_quasibinomial(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GlmOptions& opt) {
  const Eigen::Index n = X.rows();
  if (y.size() != n || n == 0) throw ValidationError("glm: X and y must have the same, nonzero length");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(y(i) >= 0.0 && y(i) <= 1.0)) throw ValidationError("glm: responses must lie in [0, 1]");
  if (!X.allFinite()) throw ValidationError("glm: features must be finite");
  const Eigen::VectorXd w = resolve_weights(opt.weights, n);
  const Eigen::MatrixXd D = with_intercept(X, opt.intercept);
  const Eigen::Index p = D.cols();

  GlmFit fit;
  fit.names = term_names(opt, X.cols());
  fit.intercept = opt.intercept;

  // Rank check on the weighted design.
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(w.cwiseSqrt().asDiagonal() * D);
    if (qr.rank() < p) {
      std::string dep;
      for (Eigen::Index k = qr.rank(); k < p; ++k) {
        if (!dep.empty()) dep += ", ";
        dep += fit.names[static_cast<std::size_t>(qr.colsPermutation().indices()(k))];
      }
      throw ValidationError("glm: design matrix is rank deficient; dependent columns: " + dep);
    }
  }

  Eigen::VectorXd mu(n);
  for (Eigen::Index i = 0; i < n; ++i) mu(i) = (w(i) * y(i) + 0.5) / (w(i) + 1.0);
  Eigen::VectorXd eta = (mu.array() / (1.0 - mu.array())).log().matrix();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double dev = binomial_deviance(y, mu, w);
  for (fit.n_iter = 1; fit.n_iter <= opt.max_iter; ++fit.n_iter) {
    const Eigen::VectorXd var = (mu.array() * (1.0 - mu.array())).matrix();
    const Eigen::VectorXd z = eta + ((y - mu).array() / var.array()).matrix();
    const Eigen::VectorXd sw = (w.array() * var.array()).sqrt().matrix();
    beta = (sw.asDiagonal() * D).colPivHouseholderQr().solve(sw.asDiagonal() * z);
    eta = D * beta;
    mu = logistic(eta);
    const double dev_new = binomial_deviance(y, mu, w);
    const bool done = std::abs(dev_new - dev) / (std::abs(dev_new) + 0.1) < opt.tol;
    dev = dev_new;
    if (done) {
      fit.converged = true;
      break;
    }
  }
  fit.n_iter = std::min(fit.n_iter, opt.max_iter);

  fit.coefficients = beta;
  fit.residual_deviance = dev;
  const double ybar = y.dot(w) / w.sum();
  fit.null_deviance = binomial_deviance(y, Eigen::VectorXd::Constant(n, std::clamp(ybar, kMuClip, 1.0 - kMuClip)), w);

  double pearson = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) pearson += w(i) * (y(i) - mu(i)) * (y(i) - mu(i)) / (mu(i) * (1.0 - mu(i)));
  fit.dispersion = n > p ? pearson / static_cast<double>(n - p) : std::numeric_limits<double>::quiet_NaN();

  const Eigen::VectorXd W = (w.array() * mu.array() * (1.0 - mu.array())).matrix();
  const Eigen::MatrixXd info = D.transpose() * W.asDiagonal() * D;
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p)) * fit.dispersion;
  fit.std_errors = cov.diagonal().cwiseSqrt();
  fit.t_values = fit.coefficients.cwiseQuotient(fit.std_errors);
  return fit;
}

Eigen::VectorXd glm_predict(const GlmFit& fit, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd D = with_intercept(X, fit.intercept);
  if (D.cols() != fit.coefficients.size()) throw ValidationError("glm: feature count does not match the fit");
  return logistic(D * fit.coefficients);
}

std::vector<DevianceRow> deviance_anova(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GlmOptions& opt,
                                        std::vector<int> order) {
  if (!opt.intercept) throw ValidationError("anova: sequential deviance needs the intercept");
  if (order.empty())
    for (Eigen::Index j = 0; j < X.cols(); ++j) order.push_back(static_cast<int>(j));
  std::vector<int> seen(static_cast<std::size_t>(X.cols()), 0);
  for (int j : order) {
    if (j < 0 || j >= X.cols()) throw ValidationError("anova: term index out of range");
    if (seen[static_cast<std::size_t>(j)]++) throw ValidationError("anova: repeated term");
  }
  const auto names = term_names(opt, X.cols());

  std::vector<DevianceRow> rows;
  GlmOptions sub = opt;
  sub.names.clear();
  Eigen::MatrixXd cols(X.rows(), 0);
  // Null deviance of the intercept-only model.
  const Eigen::VectorXd w = resolve_weights(opt.weights, X.rows());
  const double ybar = y.dot(w) / w.sum();
  double prev = binomial_deviance(y, Eigen::VectorXd::Constant(y.size(), std::clamp(ybar, kMuClip, 1.0 - kMuClip)), w);
  const double null_dev = prev;
  for (int j : order) {
    cols.conservativeResize(Eigen::NoChange, cols.cols() + 1);
    cols.rightCols(1) = X.col(j);
    const GlmFit f = fit_quasibinomial(cols, y, sub);
    rows.push_back({names[static_cast<std::size_t>(j + 1)], prev - f.residual_deviance, f.residual_deviance, 0.0});
    prev = f.residual_deviance;
  }
  const double total = null_dev - prev;
  for (auto& r : rows) r.percent = total != 0.0 ? 100.0 * r.deviance / total : 0.0;
  return rows;
}

namespace {

double score(const GlmFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
             double null_dev) {
  return 1.0 - binomial_deviance(y, glm_predict(fit, X), w) / null_dev;
}

double one_repeat(const GlmFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                  double null_dev, double base, int j, int r, std::uint64_t seed) {
  Eigen::MatrixXd Xp = X;
  std::vector<double> col(Xp.col(j).data(), Xp.col(j).data() + Xp.rows());
  Rng rng(derive_seed(seed, {stream::permutation, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(r)}));
  rng.shuffle(col);
  for (Eigen::Index i = 0; i < Xp.rows(); ++i) Xp(i, j) = col[static_cast<std::size_t>(i)];
  return base - score(fit, Xp, y, w, null_dev);
}

struct ImportanceSetup {
  Eigen::VectorXd w;
  double null_dev;
  double base;
};

ImportanceSetup setup(const GlmFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_repeats,
                      const Eigen::VectorXd& weights) {
  if (n_repeats < 1) throw ValidationError("importance: n_repeats must be >= 1");
  if (y.size() != X.rows()) throw ValidationError("importance: X and y lengths differ");
  ImportanceSetup s;
  s.w = resolve_weights(weights, X.rows());
  const double ybar = y.dot(s.w) / s.w.sum();
  s.null_dev = binomial_deviance(y, Eigen::VectorXd::Constant(y.size(), std::clamp(ybar, kMuClip, 1.0 - kMuClip)), s.w);
  if (!(s.null_dev > 0.0)) throw ValidationError("importance: constant response has no deviance to explain");
  s.base = score(fit, X, y, s.w, s.null_dev);
  return s;
}

std::vector<double> average(const std::vector<double>& drops, Eigen::Index p, int n_repeats) {
  std::vector<double> out(static_cast<std::size_t>(p), 0.0);
  for (Eigen::Index j = 0; j < p; ++j) {
    double s = 0.0;
    for (int r = 0; r < n_repeats; ++r) s += drops[static_cast<std::size_t>(j * n_repeats + r)];
    out[static_cast<std::size_t>(j)] = s / n_repeats;
  }
  return out;
}

}  // namespace

std::vector<double> permutation_importance(const GlmFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                           int n_repeats, std::uint64_t seed, const Eigen::VectorXd& weights,
                                           Parallelism par) {
  const ImportanceSetup s = setup(fit, X, y, n_repeats, weights);
  const Eigen::Index p = X.cols();
  const int tasks = static_cast<int>(p) * n_repeats;
  std::vector<double> drops(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic) num_threads(resolve_jobs(par))
  for (int t = 0; t < tasks; ++t)
    drops[static_cast<std::size_t>(t)] = one_repeat(fit, X, y, s.w, s.null_dev, s.base, t / n_repeats, t % n_repeats, seed);
  return average(drops, p, n_repeats);
}

std::vector<double> permutation_importance_serial(const GlmFit& fit, const Eigen::MatrixXd& X,
                                                  const Eigen::VectorXd& y, int n_repeats, std::uint64_t seed,
                                                  const Eigen::VectorXd& weights) {
  const ImportanceSetup s = setup(fit, X, y, n_repeats, weights);
  const Eigen::Index p = X.cols();
  std::vector<double> drops(static_cast<std::size_t>(p * n_repeats));
  for (int t = 0; t < static_cast<int>(p) * n_repeats; ++t)
    drops[static_cast<std::size_t>(t)] = one_repeat(fit, X, y, s.w, s.null_dev, s.base, t / n_repeats, t % n_repeats, seed);
  return average(drops, p, n_repeats);
}

GlmTable read_glm_table(std::istream& is, const std::string& response, const std::vector<std::string>& drop,
                        const std::optional<std::string>& weight_column) {
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("glm table: empty input");
  const auto header = split(line);
  int resp = -1, wcol = -1;
  std::vector<int> feats;
  GlmTable t;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const auto& h = header[static_cast<std::size_t>(c)];
    if (h == response) {
      resp = c;
    } else if (weight_column && h == *weight_column) {
      wcol = c;
    } else if (std::find(drop.begin(), drop.end(), h) == drop.end()) {
      feats.push_back(c);
      t.names.push_back(h);
    }
  }
  if (resp < 0) throw ValidationError("glm table: no response column '" + response + "'");
  if (weight_column && wcol < 0) throw ValidationError("glm table: no weight column '" + *weight_column + "'");

  std::vector<std::vector<double>> rows;
  std::vector<double> ys, ws;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ValidationError("glm table: line " + std::to_string(lineno) + " has the wrong column count");
    if (cells[static_cast<std::size_t>(resp)] == "nan") continue;
    try {
      std::vector<double> r;
      for (int c : feats) r.push_back(std::stod(cells[static_cast<std::size_t>(c)]));
      ys.push_back(std::stod(cells[static_cast<std::size_t>(resp)]));
      if (wcol >= 0) ws.push_back(std::stod(cells[static_cast<std::size_t>(wcol)]));
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ValidationError("glm table: non-numeric value on line " + std::to_string(lineno));
    }
  }
  t.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feats.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < feats.size(); ++j) t.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  t.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  if (wcol >= 0) t.weights = Eigen::Map<Eigen::VectorXd>(ws.data(), static_cast<Eigen::Index>(ws.size()));
  return t;
}

void write_coefficient_table(std::ostream& os, const GlmFit& fit, const std::vector<DevianceRow>& anova) {
  const auto old = os.precision(17);
  os << "term,Estimate,Std. Error,t-value,Deviance%\n";
  for (std::size_t k = 0; k < fit.names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    os << fit.names[k] << ',' << fit.coefficients(i) << ',' << fit.std_errors(i) << ',' << fit.t_values(i) << ',';
    for (const auto& r : anova)
      if (r.term == fit.names[k]) os << r.percent;
    os << '\n';
  }
  os.precision(old);
}

}  // namespace compdyn
