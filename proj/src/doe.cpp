#include "compdyn/doe.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "compdyn/errors.hpp"
#include "compdyn/rng.hpp"

namespace compdyn {

void validate_factors(const std::vector<FactorRange>& factors) {
  if (factors.empty()) throw ValidationError("design: at least one factor required");
  for (const auto& f : factors) {
    if (!std::isfinite(f.lo) || !std::isfinite(f.hi) || !(f.lo < f.hi))
      throw ValidationError("design: factor '" + f.name + "' needs a finite range with lo < hi");
    for (const auto& g : factors)
      if (&g != &f && g.name == f.name) throw ValidationError("design: duplicate factor '" + f.name + "'");
  }
}

double max_abs_column_correlation(const Eigen::MatrixXd& points) {
  const Eigen::Index d = points.cols();
  if (d < 2 || points.rows() < 2) return 0.0;
  const Eigen::MatrixXd c = points.rowwise() - points.colwise().mean();
  const Eigen::VectorXd norms = c.colwise().norm();
  double m = 0.0;
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index l = j + 1; l < d; ++l) {
      if (norms(j) == 0.0 || norms(l) == 0.0) continue;
      m = std::max(m, std::abs(c.col(j).dot(c.col(l)) / (norms(j) * norms(l))));
    }
  return m;
}

DesignMatrix build_design(const std::vector<FactorRange>& ranges, int k, std::uint64_t seed, double target_corr) {
  validate_factors(ranges);
  if (k < 1) throw ValidationError("design: sample count must be >= 1");
  const int d = static_cast<int>(ranges.size());
  Rng rng(derive_seed(seed, {stream::design}));

  // Centered levels; every column holds a permutation of them.
  std::vector<double> level(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) level[static_cast<std::size_t>(i)] = k == 1 ? 0.0 : static_cast<double>(i) / (k - 1) - 0.5;
  Eigen::MatrixXd u(k, d);
  for (int j = 0; j < d; ++j) {
    std::vector<double> col = level;
    rng.shuffle(col);
    for (int i = 0; i < k; ++i) u(i, j) = col[static_cast<std::size_t>(i)];
  }

  double best_max = 0.0;
  Eigen::MatrixXd best = u;
  if (d >= 2 && k >= 3) {
    const double ss = std::inner_product(level.begin(), level.end(), level.begin(), 0.0);
    Eigen::MatrixXd G = u.transpose() * u;
    auto max_corr = [&] {
      double m = 0.0;
      for (int j = 0; j < d; ++j)
        for (int l = j + 1; l < d; ++l) m = std::max(m, std::abs(G(j, l)) / ss);
      return m;
    };
    // Cost: sum of squared correlations. A swap of rows r, s in column j
    // shifts G(j, l) by (u_sj - u_rj)(u_rl - u_sl).
    std::vector<double> delta(static_cast<std::size_t>(d));
    auto propose = [&](int j, int r, int s) {
      double dc = 0.0;
      const double a = u(s, j) - u(r, j);
      for (int l = 0; l < d; ++l) {
        if (l == j) continue;
        const double g = a * (u(r, l) - u(s, l));
        delta[static_cast<std::size_t>(l)] = g;
        dc += (2.0 * G(j, l) + g) * g;
      }
      return dc / (ss * ss);
    };
    auto apply = [&](int j, int r, int s) {
      for (int l = 0; l < d; ++l) {
        if (l == j) continue;
        G(j, l) += delta[static_cast<std::size_t>(l)];
        G(l, j) = G(j, l);
      }
      std::swap(u(r, j), u(s, j));
    };
    auto random_move = [&](int& j, int& r, int& s) {
      j = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
      r = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      s = static_cast<int>(rng.below(static_cast<std::uint64_t>(k - 1)));
      if (s >= r) ++s;
    };

    // Starting temperature: uphill moves of average size accepted half the time.
    double up = 0.0;
    int n_up = 0;
    for (int t = 0; t < 200; ++t) {
      int j, r, s;
      random_move(j, r, s);
      const double dc = propose(j, r, s);
      if (dc > 0) {
        up += dc;
        ++n_up;
      }
    }
    const double T0 = n_up ? up / n_up / std::log(2.0) : 1e-6;
    const long budget = std::max(20000L, 400L * k * d);
    const double cool = std::pow(1e-4, 1.0 / static_cast<double>(budget));
    double T = T0;
    double cost = 0.0;
    for (int j = 0; j < d; ++j)
      for (int l = j + 1; l < d; ++l) cost += G(j, l) * G(j, l) / (ss * ss);
    double best_cost = cost;
    best_max = max_corr();
    for (long it = 0; it < budget && best_max > target_corr; ++it, T *= cool) {
      int j, r, s;
      random_move(j, r, s);
      const double dc = propose(j, r, s);
      if (dc <= 0.0 || rng.uniform() < std::exp(-dc / T)) {
        apply(j, r, s);
        cost += dc;
        if (cost < best_cost) {
          best_cost = cost;
          const double m = max_corr();
          if (m < best_max) {
            best_max = m;
            best = u;
          }
        }
      }
    }
  }

  DesignMatrix out;
  out.ranges = ranges;
  out.points.resize(k, d);
  for (int j = 0; j < d; ++j) {
    const auto& f = ranges[static_cast<std::size_t>(j)];
    for (int i = 0; i < k; ++i) out.points(i, j) = f.lo + (best(i, j) + 0.5) * (f.hi - f.lo);
  }
  if (k == 1)
    for (int j = 0; j < d; ++j) out.points(0, j) = 0.5 * (ranges[static_cast<std::size_t>(j)].lo + ranges[static_cast<std::size_t>(j)].hi);
  out.max_abs_corr = max_abs_column_correlation(out.points);
  return out;
}

double silverman_bandwidth(std::span<const double> ys) {
  const std::size_t n = ys.size();
  if (n < 2) return 0.0;
  std::vector<double> s(ys.begin(), ys.end());
  std::sort(s.begin(), s.end());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double y : s) var += (y - mean) * (y - mean);
  const double sd = std::sqrt(var / static_cast<double>(n - 1));
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

Kde::Kde(std::vector<double> ys, std::optional<double> bandwidth) : ys_(std::move(ys)) {
  if (ys_.empty()) throw ValidationError("kde: at least one sample required");
  for (double y : ys_)
    if (!std::isfinite(y)) throw ValidationError("kde: samples must be finite");
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) throw ValidationError("kde: bandwidth must be > 0");
    h_ = *bandwidth;
  } else {
    h_ = silverman_bandwidth(ys_);
    if (!(h_ > 0.0)) h_ = 0.05;
  }
}

double Kde::operator()(double y) const {
  // Images y_i + 2m and -y_i + 2m: reflecting about 0 and 1 repeatedly.
  constexpr int images = 3;
  const double inv = 1.0 / h_;
  double s = 0.0;
  for (double yi : ys_)
    for (int m = -images; m <= images; ++m) {
      const double a = (y - yi - 2.0 * m) * inv;
      const double b = (y + yi - 2.0 * m) * inv;
      s += std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b);
    }
  return s * inv / (std::sqrt(kTwoPi) * static_cast<double>(ys_.size()));
}

std::vector<double> objective(std::span<const double> ys, std::optional<double> bandwidth) {
  if (ys.empty()) return {};
  const Kde kde(std::vector<double>(ys.begin(), ys.end()), bandwidth);
  std::vector<double> F(ys.size());
  double fmax = 0.0;
  for (std::size_t m = 0; m < ys.size(); ++m) {
    F[m] = 1.0 / kde(ys[m]);
    fmax = std::max(fmax, F[m]);
  }
  for (double& f : F) f /= fmax;
  return F;
}

GaussianProcess::GaussianProcess(int dim) : dim_(dim) {
  if (dim < 1) throw ValidationError("gp: dimension must be >= 1");
  reset_hyper();
}

void GaussianProcess::reset_hyper() {
  hyper_.length.assign(static_cast<std::size_t>(dim_), 0.3);
  hyper_.signal_var = 0.1;
  hyper_.noise_var = 1e-6;
}

void GaussianProcess::set_hyper(GpHyper h) {
  if (static_cast<int>(h.length.size()) != dim_) throw ValidationError("gp: one length scale per input");
  for (double l : h.length)
    if (!(l > 0.0)) throw ValidationError("gp: length scales must be > 0");
  if (!(h.signal_var > 0.0) || !(h.noise_var > 0.0)) throw ValidationError("gp: variances must be > 0");
  hyper_ = std::move(h);
  if (x_.rows() > 0) factorize();
}

double GaussianProcess::kernel(std::span<const double> a, std::span<const double> b) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double t = (a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]) / hyper_.length[static_cast<std::size_t>(i)];
    s += t * t;
  }
  return hyper_.signal_var * std::exp(-0.5 * s);
}

void GaussianProcess::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.cols() != dim_ || x.rows() != y.size() || x.rows() < 1) throw ValidationError("gp: inconsistent training data");
  x_ = x;
  y_ = y;
  mean_ = y.mean();
  factorize();
}

void GaussianProcess::factorize() {
  const Eigen::Index n = x_.rows();
  Eigen::MatrixXd K(n, n);
  std::vector<double> a(static_cast<std::size_t>(dim_)), b(static_cast<std::size_t>(dim_));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      for (int k = 0; k < dim_; ++k) {
        a[static_cast<std::size_t>(k)] = x_(i, k);
        b[static_cast<std::size_t>(k)] = x_(j, k);
      }
      K(i, j) = K(j, i) = kernel(a, b);
    }
  for (double jit : {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
    Eigen::MatrixXd Kn = K;
    Kn.diagonal().array() += hyper_.noise_var + jit;
    llt_.compute(Kn);
    if (llt_.info() == Eigen::Success && (llt_.matrixLLT().diagonal().array() > 0).all()) {
      jitter_ = jit;
      alpha_ = llt_.solve(y_ - Eigen::VectorXd::Constant(n, mean_));
      return;
    }
  }
  throw NumericalError("gp: kernel matrix not positive definite even with 1e-6 jitter");
}

double GaussianProcess::log_marginal_likelihood() const {
  const Eigen::Index n = x_.rows();
  const Eigen::VectorXd r = y_ - Eigen::VectorXd::Constant(n, mean_);
  const double logdet = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  return -0.5 * r.dot(alpha_) - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(kTwoPi);
}

void GaussianProcess::optimize_hyper(int iterations) {
  if (x_.rows() < 2) return;
  const Eigen::Index n = x_.rows();
  const int np = dim_ + 2;  // log lengths, log signal, log noise
  auto pack = [&](const GpHyper& h) {
    Eigen::VectorXd t(np);
    for (int i = 0; i < dim_; ++i) t(i) = std::log(h.length[static_cast<std::size_t>(i)]);
    t(dim_) = std::log(h.signal_var);
    t(dim_ + 1) = std::log(h.noise_var);
    return t;
  };
  Eigen::VectorXd lo(np), hi(np);
  lo.head(dim_).setConstant(std::log(1e-2));
  hi.head(dim_).setConstant(std::log(10.0));
  lo(dim_) = std::log(1e-6);
  hi(dim_) = std::log(10.0);
  lo(dim_ + 1) = std::log(1e-8);
  hi(dim_ + 1) = std::log(1e-1);
  auto unpack = [&](const Eigen::VectorXd& t) {
    GpHyper h;
    for (int i = 0; i < dim_; ++i) h.length.push_back(std::exp(t(i)));
    h.signal_var = std::exp(t(dim_));
    h.noise_var = std::exp(t(dim_ + 1));
    return h;
  };
  auto gradient = [&]() {
    const Eigen::MatrixXd Kinv = llt_.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd W = alpha_ * alpha_.transpose() - Kinv;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(np);
    std::vector<double> a(static_cast<std::size_t>(dim_)), b(static_cast<std::size_t>(dim_));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        for (int k = 0; k < dim_; ++k) {
          a[static_cast<std::size_t>(k)] = x_(i, k);
          b[static_cast<std::size_t>(k)] = x_(j, k);
        }
        const double kij = kernel(a, b);
        const double w = 0.5 * W(i, j);
        for (int k = 0; k < dim_; ++k) {
          const double t = (x_(i, k) - x_(j, k)) / hyper_.length[static_cast<std::size_t>(k)];
          g(k) += w * kij * t * t;
        }
        g(dim_) += w * kij;
      }
    g(dim_ + 1) = 0.5 * hyper_.noise_var * W.trace();
    return g;
  };

  Eigen::VectorXd theta = pack(hyper_).cwiseMax(lo).cwiseMin(hi);
  hyper_ = unpack(theta);
  factorize();
  double best = log_marginal_likelihood();
  double step = 0.1;
  for (int it = 0; it < iterations && step > 1e-6; ++it) {
    const Eigen::VectorXd g = gradient();
    const double gn = g.norm();
    if (!(gn > 1e-10)) break;
    const Eigen::VectorXd trial = (theta + step * g / gn).cwiseMax(lo).cwiseMin(hi);
    const GpHyper keep = hyper_;
    hyper_ = unpack(trial);
    bool ok = true;
    double val = -std::numeric_limits<double>::infinity();
    try {
      factorize();
      val = log_marginal_likelihood();
    } catch (const NumericalError&) {
      ok = false;
    }
    if (ok && val > best) {
      theta = trial;
      best = val;
      step *= 1.5;
    } else {
      hyper_ = keep;
      factorize();
      step *= 0.5;
    }
  }
}

GaussianProcess::Prediction GaussianProcess::predict(std::span<const double> x) const {
  if (x_.rows() == 0) return {0.0, std::sqrt(hyper_.signal_var)};
  const Eigen::Index n = x_.rows();
  Eigen::VectorXd k(n);
  std::vector<double> b(static_cast<std::size_t>(dim_));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < dim_; ++j) b[static_cast<std::size_t>(j)] = x_(i, j);
    k(i) = kernel(x, b);
  }
  const Eigen::VectorXd v = llt_.matrixL().solve(k);
  const double var = hyper_.signal_var - v.squaredNorm();
  return {mean_ + k.dot(alpha_), std::sqrt(std::max(var, 0.0))};
}

namespace {

std::vector<int> first_primes(int count) {
  std::vector<int> p;
  for (int c = 2; static_cast<int>(p.size()) < count; ++c) {
    bool prime = true;
    for (int q : p) {
      if (q * q > c) break;
      if (c % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) p.push_back(c);
  }
  return p;
}

double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
    i /= static_cast<std::uint64_t>(base);
  }
  return r;
}

}  // namespace

Eigen::MatrixXd halton(int n, int dim, std::uint64_t seed) {
  const auto primes = first_primes(dim);
  Rng rng(seed);
  std::vector<double> shift(static_cast<std::size_t>(dim));
  for (double& s : shift) s = rng.uniform();
  Eigen::MatrixXd h(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) {
      const double v = radical_inverse(static_cast<std::uint64_t>(i + 1), primes[static_cast<std::size_t>(j)]) +
                       shift[static_cast<std::size_t>(j)];
      h(i, j) = v - std::floor(v);
    }
  return h;
}

std::string_view source_name(DesignSource s) { return s == DesignSource::nolh ? "nolh" : "acquisition"; }

DesignSource parse_source(std::string_view name) {
  if (name == "nolh") return DesignSource::nolh;
  if (name == "acquisition") return DesignSource::acquisition;
  throw ValidationError("unknown design source '" + std::string(name) + "'");
}

std::vector<double> to_unit(const std::vector<FactorRange>& ranges, std::span<const double> x) {
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = (x[i] - ranges[i].lo) / (ranges[i].hi - ranges[i].lo);
  return u;
}

std::vector<double> from_unit(const std::vector<FactorRange>& ranges, std::span<const double> u) {
  std::vector<double> x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) x[i] = ranges[i].lo + u[i] * (ranges[i].hi - ranges[i].lo);
  return x;
}

double acquisition(const GaussianProcess& gp, const std::vector<FactorRange>& ranges, std::span<const double> x,
                   double kappa) {
  const auto p = gp.predict(to_unit(ranges, x));
  return p.mean + kappa * p.sd;
}

std::vector<double> bo_step(const GaussianProcess& gp, const std::vector<FactorRange>& ranges, std::uint64_t seed,
                            const BoSettings& settings) {
  validate_factors(ranges);
  const int d = static_cast<int>(ranges.size());
  if (gp.dim() != d) throw ValidationError("bo_step: surrogate dimension does not match the factors");
  if (settings.starts < 1) throw ValidationError("bo_step: at least one start required");
  auto ucb = [&](const std::vector<double>& u) {
    const auto p = gp.predict(u);
    return p.mean + settings.kappa * p.sd;
  };
  const Eigen::MatrixXd starts = halton(settings.starts, d, seed);
  std::vector<double> best_u;
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < settings.starts; ++s) {
    std::vector<double> u(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) u[static_cast<std::size_t>(j)] = starts(s, j);
    double val = ucb(u);
    // Opportunistic compass search in the unit box.
    for (double step = 0.1; step >= 1e-4;) {
      bool moved = false;
      for (int j = 0; j < d && !moved; ++j)
        for (double sign : {1.0, -1.0}) {
          std::vector<double> t = u;
          auto& c = t[static_cast<std::size_t>(j)];
          c = std::clamp(c + sign * step, 0.0, 1.0);
          if (c == u[static_cast<std::size_t>(j)]) continue;
          const double tv = ucb(t);
          if (tv > val) {
            u = std::move(t);
            val = tv;
            moved = true;
            break;
          }
        }
      if (!moved) step *= 0.5;
    }
    if (val > best) {
      best = val;
      best_u = u;
    }
  }
  return from_unit(ranges, best_u);
}

namespace {

bool evaluate(const Evaluator& g, std::span<const double> x, Parallelism inner, double& y) {
  try {
    y = g(x, inner);
  } catch (const std::exception&) {
    return false;
  }
  return std::isfinite(y) && y >= 0.0 && y <= 1.0;
}

void rescore(std::vector<DesignRecord>& records, std::size_t upto, const BoSettings& s) {
  std::vector<double> ys;
  for (std::size_t i = 0; i < upto; ++i)
    if (!records[i].failed) ys.push_back(records[i].y);
  const auto z = objective(ys, s.bandwidth);
  std::size_t k = 0;
  for (std::size_t i = 0; i < upto; ++i) records[i].z = records[i].failed ? std::nan("") : z[k++];
}

// Surrogate training set from the first `upto` records, scored on that prefix.
void training_set(const std::vector<DesignRecord>& records, std::size_t upto, const std::vector<FactorRange>& f,
                  const BoSettings& s, Eigen::MatrixXd& X, Eigen::VectorXd& Z) {
  std::vector<DesignRecord> prefix(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(upto));
  rescore(prefix, upto, s);
  std::vector<const DesignRecord*> ok;
  for (const auto& r : prefix)
    if (!r.failed) ok.push_back(&r);
  X.resize(static_cast<Eigen::Index>(ok.size()), static_cast<Eigen::Index>(f.size()));
  Z.resize(static_cast<Eigen::Index>(ok.size()));
  for (std::size_t i = 0; i < ok.size(); ++i) {
    const auto u = to_unit(f, ok[i]->x);
    for (std::size_t j = 0; j < u.size(); ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u[j];
    Z(static_cast<Eigen::Index>(i)) = ok[i]->z;
  }
}

}  // namespace

std::vector<DesignRecord> run_doe(const Evaluator& g, const std::vector<FactorRange>& factors, int k_init,
                                  int n_total, std::uint64_t seed, const BoSettings& settings, Parallelism par,
                                  std::vector<DesignRecord> resume,
                                  const std::function<void(const std::vector<DesignRecord>&)>& on_record) {
  validate_factors(factors);
  if (k_init < 1) throw ValidationError("doe: k_init must be >= 1");
  if (n_total < k_init) throw ValidationError("doe: n_total must be >= k_init");
  if (settings.refit_every < 1) throw ValidationError("doe: refit_every must be >= 1");
  if (static_cast<int>(resume.size()) > n_total) throw ValidationError("doe: resume log longer than n_total");
  const int d = static_cast<int>(factors.size());
  for (const auto& r : resume)
    if (static_cast<int>(r.x.size()) != d) throw ValidationError("doe: resume log has the wrong factor count");

  const DesignMatrix design = build_design(factors, k_init, seed);
  std::vector<DesignRecord> records = std::move(resume);

  const int have = static_cast<int>(records.size());
  if (have < k_init) {
    records.resize(static_cast<std::size_t>(k_init));
#pragma omp parallel for schedule(dynamic) num_threads(resolve_jobs(par))
    for (int i = have; i < k_init; ++i) {
      DesignRecord& r = records[static_cast<std::size_t>(i)];
      r.x.resize(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) r.x[static_cast<std::size_t>(j)] = design.points(i, j);
      r.iteration = i;
      r.source = DesignSource::nolh;
      r.failed = !evaluate(g, r.x, Parallelism{1}, r.y);
      if (r.failed) r.y = std::nan("");
    }
    rescore(records, records.size(), settings);
    if (on_record) on_record(records);
  }

  GaussianProcess gp(d);
  bool hyper_ready = false;
  while (static_cast<int>(records.size()) < n_total) {
    const int a = static_cast<int>(records.size()) - k_init;  // acquisition index
    Eigen::MatrixXd X;
    Eigen::VectorXd Z;
    if (a % settings.refit_every == 0 || !hyper_ready) {
      // Hyperparameters depend only on the data present at the last refit
      // point, so a resumed run reproduces them.
      const auto at = static_cast<std::size_t>(k_init + (a / settings.refit_every) * settings.refit_every);
      training_set(records, at, factors, settings, X, Z);
      if (X.rows() >= 2) {
        gp.reset_hyper();
        GpHyper h = gp.hyper();
        const double var = (Z.array() - Z.mean()).square().mean();
        h.signal_var = std::max(var, 1e-4);
        gp.set_hyper(h);
        gp.fit(X, Z);
        gp.optimize_hyper();
      }
      hyper_ready = true;
    }
    training_set(records, records.size(), factors, settings, X, Z);
    const std::uint64_t acq_seed = derive_seed(seed, {stream::acquisition, static_cast<std::uint64_t>(a)});
    DesignRecord r;
    if (X.rows() >= 2) {
      gp.fit(X, Z);
      r.x = bo_step(gp, factors, acq_seed, settings);
    } else {
      const Eigen::MatrixXd h = halton(1, d, acq_seed);
      std::vector<double> u(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) u[static_cast<std::size_t>(j)] = h(0, j);
      r.x = from_unit(factors, u);
    }
    r.iteration = static_cast<int>(records.size());
    r.source = DesignSource::acquisition;
    r.failed = !evaluate(g, r.x, par, r.y);
    if (r.failed) r.y = std::nan("");
    records.push_back(std::move(r));
    rescore(records, records.size(), settings);
    if (on_record) on_record(records);
  }
  return records;
}

Evaluator basin_evaluator(Variant v, ModelConfig cfg, NetworkFactory net, std::vector<FactorRange> factors,
                          BasinSpec spec) {
  validate_factors(factors);
  for (const auto& f : factors)
    if (!is_model_param(f.name)) throw ValidationError("doe: factor '" + f.name + "' is not a model parameter");
  spec.validate();
  const bool needs_net = !is_reduced(v) || v == Variant::eco3_reduced;
  if (needs_net && !net) throw ValidationError("doe: variant needs a network factory");
  return [=](std::span<const double> x, Parallelism inner) {
    ModelConfig c = cfg;
    for (std::size_t i = 0; i < factors.size(); ++i) set_param(c, factors[i].name, x[i]);
    c.validate();
    const System sys(v, c, needs_net ? net(c) : nullptr);
    return estimate_basin(sys, spec, inner).value;
  };
}

void write_doe_log(std::ostream& os, const std::vector<FactorRange>& factors, const std::vector<DesignRecord>& r) {
  const auto old = os.precision(17);
  os << "iter,source";
  for (const auto& f : factors) os << ',' << f.name;
  os << ",basin,objective\n";
  for (const auto& rec : r) {
    os << rec.iteration << ',' << source_name(rec.source);
    for (double x : rec.x) os << ',' << x;
    if (rec.failed)
      os << ",nan,nan\n";
    else
      os << ',' << rec.y << ',' << rec.z << '\n';
  }
  os.precision(old);
}

std::vector<DesignRecord> read_doe_log(std::istream& is, const std::vector<FactorRange>& factors) {
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    return out;
  };
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("doe log: empty");
  std::vector<std::string> expect{"iter", "source"};
  for (const auto& f : factors) expect.push_back(f.name);
  expect.push_back("basin");
  expect.push_back("objective");
  if (split(line) != expect) throw ValidationError("doe log: header does not match the factors");
  std::vector<DesignRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != expect.size()) throw ValidationError("doe log: wrong column count in '" + line + "'");
    DesignRecord r;
    try {
      r.iteration = std::stoi(cells[0]);
      r.source = parse_source(cells[1]);
      for (std::size_t j = 0; j < factors.size(); ++j) r.x.push_back(std::stod(cells[2 + j]));
      r.failed = cells[cells.size() - 2] == "nan";
      r.y = r.failed ? std::nan("") : std::stod(cells[cells.size() - 2]);
      r.z = r.failed ? std::nan("") : std::stod(cells.back());
    } catch (const std::logic_error&) {
      throw ValidationError("doe log: unparsable row '" + line + "'");
    }
    if (r.iteration != static_cast<int>(out.size())) throw ValidationError("doe log: iterations out of order");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace compdyn
