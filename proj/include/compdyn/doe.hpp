#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "compdyn/basin.hpp"
#include "compdyn/parallel.hpp"

namespace compdyn {

struct FactorRange {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
};

void validate_factors(const std::vector<FactorRange>& factors);

/// Latin hypercube whose columns are permutations of k equally spaced
/// levels spanning each range (endpoints included), decorrelated by
/// annealed swaps within columns.
struct DesignMatrix {
  Eigen::MatrixXd points;  // k rows, one column per factor
  std::vector<FactorRange> ranges;
  double max_abs_corr = 0.0;  // 0 for a single factor
};

DesignMatrix build_design(const std::vector<FactorRange>& ranges, int k, std::uint64_t seed,
                          double target_corr = 0.05);
double max_abs_column_correlation(const Eigen::MatrixXd& points);

double silverman_bandwidth(std::span<const double> ys);

/// Gaussian KDE on [0, 1] with mirror images about both ends, so the
/// density integrates to one over the interval. With no bandwidth given,
/// Silverman's rule; 0.05 when that is degenerate (fewer than two distinct
/// samples).
class Kde {
 public:
  explicit Kde(std::vector<double> ys, std::optional<double> bandwidth = std::nullopt);
  double operator()(double y) const;
  double bandwidth() const { return h_; }

 private:
  std::vector<double> ys_;
  double h_;
};

/// Stratification score: F_m = 1 / kde(y_m), z_m = F_m / max F. Rare basin
/// values score close to 1.
std::vector<double> objective(std::span<const double> ys, std::optional<double> bandwidth = std::nullopt);

/// Squared-exponential ARD kernel hyperparameters (inputs scaled to [0,1]).
struct GpHyper {
  std::vector<double> length;
  double signal_var = 0.1;
  double noise_var = 1e-6;
};

/// Gaussian-process regression with a constant mean (the target average).
class GaussianProcess {
 public:
  explicit GaussianProcess(int dim);

  int dim() const { return dim_; }
  const GpHyper& hyper() const { return hyper_; }
  void set_hyper(GpHyper h);
  // Resets hyperparameters to the defaults used at every refit.
  void reset_hyper();

  // x rows in [0,1]^dim. Escalates diagonal jitter up to 1e-6 before
  // giving up with NumericalError.
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
  // Gradient ascent on the log marginal likelihood in log-parameters,
  // then refits.
  void optimize_hyper(int iterations = 100);
  double log_marginal_likelihood() const;

  struct Prediction {
    double mean;
    double sd;
  };
  Prediction predict(std::span<const double> x) const;
  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
  double jitter() const { return jitter_; }

 private:
  void factorize();
  double kernel(std::span<const double> a, std::span<const double> b) const;

  int dim_;
  GpHyper hyper_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  double mean_ = 0.0;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

// Points of the Halton sequence in [0,1)^dim (bases = first primes),
// shifted modulo one by a seed-dependent offset.
Eigen::MatrixXd halton(int n, int dim, std::uint64_t seed);

enum class DesignSource { nolh, acquisition };
std::string_view source_name(DesignSource s);
DesignSource parse_source(std::string_view name);

struct DesignRecord {
  std::vector<double> x;  // factor values
  double y = 0.0;         // basin value, NaN when the evaluation failed
  double z = 0.0;         // objective, NaN when failed
  int iteration = 0;
  DesignSource source = DesignSource::nolh;
  bool failed = false;
};

struct BoSettings {
  double kappa = 2.0;
  int starts = 64;
  int refit_every = 10;
  std::optional<double> bandwidth;  // KDE bandwidth, Silverman when unset
};

/// Next point by maximising the upper confidence bound mean + kappa * sd of
/// the surrogate (already fitted on the records) from `starts` shifted
/// Halton starting points, each refined by a bounded pattern search.
std::vector<double> bo_step(const GaussianProcess& gp, const std::vector<FactorRange>& ranges,
                            std::uint64_t seed, const BoSettings& settings);

// Upper confidence bound at a point in factor units.
double acquisition(const GaussianProcess& gp, const std::vector<FactorRange>& ranges, std::span<const double> x,
                   double kappa);

// Maps between factor units and the unit cube.
std::vector<double> to_unit(const std::vector<FactorRange>& ranges, std::span<const double> x);
std::vector<double> from_unit(const std::vector<FactorRange>& ranges, std::span<const double> u);

/// g(x) with a worker budget for its own inner parallelism.
using Evaluator = std::function<double(std::span<const double> x, Parallelism inner)>;

/// The design loop: evaluate the initial Latin hypercube (in parallel),
/// score every basin value, then until n_total records exist acquire one
/// point, evaluate it, rescore all records and refit the surrogate
/// (hyperparameters re-estimated every refit_every acquisitions from the
/// data present at that moment). Evaluations that throw are flagged and
/// excluded from scoring and the surrogate. `resume` holds records of an
/// earlier run with the same inputs; they are reused instead of
/// re-evaluated. `on_record` sees the full log after every iteration.
std::vector<DesignRecord> run_doe(const Evaluator& g, const std::vector<FactorRange>& factors, int k_init,
                                  int n_total, std::uint64_t seed, const BoSettings& settings = {},
                                  Parallelism par = {}, std::vector<DesignRecord> resume = {},
                                  const std::function<void(const std::vector<DesignRecord>&)>& on_record = {});

/// Basin evaluator: factor names are model parameters set on top of cfg.
Evaluator basin_evaluator(Variant v, ModelConfig cfg, NetworkFactory net, std::vector<FactorRange> factors,
                          BasinSpec spec);

// Log CSV "iter,source,<factors>,basin,objective"; failed rows carry "nan".
void write_doe_log(std::ostream& os, const std::vector<FactorRange>& factors, const std::vector<DesignRecord>& r);
std::vector<DesignRecord> read_doe_log(std::istream& is, const std::vector<FactorRange>& factors);

}  // namespace compdyn
