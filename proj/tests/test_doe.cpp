#include <algorithm>
#include <cmath>
#include <sstream>

#include "compdyn/doe.hpp"
#include "doctest.h"

using namespace compdyn;

namespace {

std::vector<FactorRange> unit_factors(int d) {
  std::vector<FactorRange> f;
  for (int i = 0; i < d; ++i) f.push_back({"f" + std::to_string(i), 0.0, 1.0});
  return f;
}

bool latin(const Eigen::MatrixXd& pts, const std::vector<FactorRange>& f) {
  const Eigen::Index k = pts.rows();
  for (Eigen::Index j = 0; j < pts.cols(); ++j) {
    std::vector<double> col(pts.col(j).data(), pts.col(j).data() + k);
    std::sort(col.begin(), col.end());
    for (Eigen::Index i = 0; i < k; ++i) {
      const double level = k == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(k - 1);
      const auto& r = f[static_cast<std::size_t>(j)];
      if (std::abs(col[static_cast<std::size_t>(i)] - (r.lo + level * (r.hi - r.lo))) > 1e-12) return false;
    }
  }
  return true;
}

// Steep ridge: most of the square maps close to 0 or 1.
double ridge(std::span<const double> x) { return 1.0 / (1.0 + std::exp(-25.0 * (x[0] + x[1] - 1.0))); }

GaussianProcess fitted(const std::vector<std::vector<double>>& xs, const std::vector<double>& zs, GpHyper h) {
  GaussianProcess gp(static_cast<int>(xs[0].size()));
  gp.set_hyper(std::move(h));
  Eigen::MatrixXd X(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xs[0].size()));
  Eigen::VectorXd Z(static_cast<Eigen::Index>(zs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs[i].size(); ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xs[i][j];
    Z(static_cast<Eigen::Index>(i)) = zs[i];
  }
  gp.fit(X, Z);
  return gp;
}

}  // namespace

TEST_CASE("Latin hypercube design") {
  auto one = build_design(unit_factors(1), 7, 3);
  CHECK(one.max_abs_corr == 0.0);
  CHECK(latin(one.points, one.ranges));

  std::vector<FactorRange> two{{"beta1", 1.0, 5.0}, {"phi", -1.0, 1.0}};
  auto d2 = build_design(two, 5, 3);
  CHECK(d2.points.rows() == 5);
  CHECK(latin(d2.points, two));

  auto big = build_design(unit_factors(20), 129, 0);
  CHECK(latin(big.points, big.ranges));
  CHECK(big.max_abs_corr <= 0.05);
  CHECK(big.max_abs_corr == doctest::Approx(max_abs_column_correlation(big.points)));
  CHECK(build_design(unit_factors(20), 129, 0).points == big.points);

  CHECK_THROWS_AS(build_design({{"a", 1.0, 0.0}}, 4, 0), ValidationError);
  CHECK_THROWS_AS(build_design({{"a", 0.0, 1.0}, {"a", 0.0, 1.0}}, 4, 0), ValidationError);
}

TEST_CASE("kernel density") {
  Kde single({0.5}, 0.1);
  CHECK(single(0.5) > single(0.45));
  CHECK(single(0.5) > single(0.55));

  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  Kde flat(grid, 0.05);
  double lo = 1e9, hi = 0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = flat(i / 1000.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi / lo <= 1.2);

  // Midpoint quadrature of the reflected density.
  for (double h : {0.02, 0.1, 0.5}) {
    Kde k({0.0, 0.1, 0.4, 0.97, 1.0}, h);
    double mass = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) mass += k((i + 0.5) / n) / n;
    CHECK(std::abs(mass - 1.0) < 1e-6);
  }

  const std::vector<double> ys{0.1, 0.2, 0.4, 0.7, 0.75};
  CHECK(silverman_bandwidth(ys) == doctest::Approx(0.18961682181305317).epsilon(1e-12));
  CHECK(Kde({0.3, 0.3, 0.3}).bandwidth() == 0.05);
  CHECK_THROWS_AS(Kde({0.3}, -1.0), ValidationError);
}

TEST_CASE("stratification objective") {
  const std::vector<double> same{0.4, 0.4, 0.4};
  for (double z : objective(same)) CHECK(z == doctest::Approx(1.0));

  const std::vector<double> ys{0.2, 0.21, 0.19, 0.2, 0.22, 0.8};
  const auto z = objective(ys);
  CHECK(*std::max_element(z.begin(), z.end()) == 1.0);
  CHECK(z[5] == 1.0);
  for (int i = 0; i < 5; ++i) CHECK(z[static_cast<std::size_t>(i)] < 1.0);
  for (double v : z) {
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("Gaussian process regression") {
  const std::vector<std::vector<double>> xs{{0.1}, {0.35}, {0.6}, {0.9}};
  const std::vector<double> zs{0.2, 0.8, 0.5, 0.1};
  GpHyper h;
  h.length = {0.2};
  h.signal_var = 0.3;
  h.noise_var = 1e-8;
  const auto gp = fitted(xs, zs, h);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(gp.predict(xs[i]).mean - zs[i]) < 1e-5);
  CHECK(gp.predict(xs[0]).sd < 1e-3);

  // Direct dense-inverse evaluation of the same posterior.
  const Eigen::Index n = 4;
  Eigen::MatrixXd K(n, n);
  auto k = [&](double a, double b) { return 0.3 * std::exp(-0.5 * (a - b) * (a - b) / 0.04); };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = k(xs[i][0], xs[j][0]) + (i == j ? 1e-8 : 0.0);
  Eigen::VectorXd r(n), ks(n);
  const double m = 0.4;
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i) = zs[static_cast<std::size_t>(i)] - m;
    ks(i) = k(0.5, xs[static_cast<std::size_t>(i)][0]);
  }
  const Eigen::MatrixXd Ki = K.inverse();
  const double mean = m + ks.dot(Ki * r);
  const double sd = std::sqrt(0.3 - ks.dot(Ki * ks));
  const std::vector<double> q{0.5};
  CHECK(gp.predict(q).mean == doctest::Approx(mean).epsilon(1e-9));
  CHECK(gp.predict(q).sd == doctest::Approx(sd).epsilon(1e-6));

  GaussianProcess opt = fitted(xs, zs, h);
  const double before = opt.log_marginal_likelihood();
  opt.optimize_hyper();
  CHECK(opt.log_marginal_likelihood() >= before);
  CHECK(opt.hyper().noise_var > 0.0);

  GpHyper bad = h;
  bad.noise_var = 0;
  GaussianProcess g2(1);
  CHECK_THROWS_AS(g2.set_hyper(bad), ValidationError);
}

TEST_CASE("acquisition step") {
  const auto f = unit_factors(2);
  // One clear peak at (0.7, 0.3) in an otherwise flat score.
  std::vector<std::vector<double>> xs;
  std::vector<double> zs;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      xs.push_back({i / 4.0, j / 4.0});
      zs.push_back(0.1);
    }
  xs.push_back({0.7, 0.3});
  zs.push_back(1.0);
  GpHyper h;
  h.length = {0.15, 0.15};
  h.signal_var = 0.2;
  h.noise_var = 1e-6;
  const auto gp = fitted(xs, zs, h);
  BoSettings s;
  const auto next = bo_step(gp, f, 5, s);

  double best = -1e9;
  std::vector<double> arg;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) {
      const std::vector<double> x{i / 200.0, j / 200.0};
      const double a = acquisition(gp, f, x, s.kappa);
      if (a > best) {
        best = a;
        arg = x;
      }
    }
  CHECK(acquisition(gp, f, next, s.kappa) >= best - 1e-4);
  CHECK(std::hypot(next[0] - 0.7, next[1] - 0.3) < 0.15);

  // Pure exploitation with noiseless interpolation of a varying score:
  // the maximiser is not one of the training points.
  s.kappa = 0;
  const auto x0 = bo_step(gp, f, 6, s);
  for (const auto& x : xs) CHECK(std::hypot(x0[0] - x[0], x0[1] - x[1]) > 1e-3);

  // Constant score: only the posterior spread matters, so the point lands
  // away from the data.
  std::vector<std::vector<double>> corner{{0.1, 0.1}, {0.2, 0.1}, {0.1, 0.2}, {0.25, 0.25}};
  const auto flat = fitted(corner, {0.5, 0.5, 0.5, 0.5}, h);
  s.kappa = 2;
  const auto far = bo_step(flat, f, 7, s);
  double dmin = 1e9;
  for (const auto& x : corner) dmin = std::min(dmin, std::hypot(far[0] - x[0], far[1] - x[1]));
  CHECK(dmin > 0.5);
}

TEST_CASE("Halton points") {
  const auto h = halton(64, 3, 9);
  CHECK((h.array() >= 0).all());
  CHECK((h.array() < 1).all());
  CHECK(halton(64, 3, 9) == h);
  CHECK(halton(64, 3, 10) != h);
  // Base 2 with 64 points: a shifted lattice of spacing 1/64, so every half
  // of the interval holds exactly 32 of them.
  CHECK(((h.col(0).array() - 0.25).abs() < 0.25).count() == 32);
}

TEST_CASE("design loop") {
  const auto f = unit_factors(2);
  const Evaluator g = [](std::span<const double> x, Parallelism) { return ridge(x); };

  // Budget equal to the initial design: no acquisition.
  const auto pure = run_doe(g, f, 8, 8, 1);
  CHECK(pure.size() == 8);
  for (const auto& r : pure) CHECK(r.source == DesignSource::nolh);

  // Every log snapshot carries freshly recomputed scores.
  int snapshots = 0;
  const auto check = [&](const std::vector<DesignRecord>& recs) {
    ++snapshots;
    std::vector<double> ys;
    for (const auto& r : recs) ys.push_back(r.y);
    const auto z = objective(ys);
    for (std::size_t i = 0; i < recs.size(); ++i) CHECK(recs[i].z == z[i]);
  };
  const auto full = run_doe(g, f, 8, 24, 1, {}, {}, {}, check);
  CHECK(full.size() == 24);
  CHECK(snapshots == 17);
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(full[i].iteration == static_cast<int>(i));
    CHECK(full[i].source == (i < 8 ? DesignSource::nolh : DesignSource::acquisition));
    CHECK(full[i].y >= 0.0);
    CHECK(full[i].y <= 1.0);
  }

  // Deterministic, and resumable from a written log.
  const auto again = run_doe(g, f, 8, 24, 1);
  for (std::size_t i = 0; i < full.size(); ++i) CHECK(again[i].x == full[i].x);
  for (int cut : {5, 8, 13, 18}) {
    std::stringstream log;
    write_doe_log(log, f, std::vector<DesignRecord>(full.begin(), full.begin() + cut));
    const auto partial = read_doe_log(log, f);
    REQUIRE(partial.size() == static_cast<std::size_t>(cut));
    const auto resumed = run_doe(g, f, 8, 24, 1, {}, {}, partial);
    for (std::size_t i = 0; i < full.size(); ++i) {
      CHECK(resumed[i].x == full[i].x);
      CHECK(resumed[i].y == full[i].y);
      CHECK(resumed[i].z == full[i].z);
    }
  }
}

TEST_CASE("failed evaluations are flagged and skipped") {
  const auto f = unit_factors(2);
  const Evaluator g = [](std::span<const double> x, Parallelism) {
    if (x[0] > 0.8) throw NumericalError("boom");
    return ridge(x);
  };
  const auto r = run_doe(g, f, 10, 20, 4);
  int failed = 0;
  for (const auto& rec : r) {
    if (rec.failed) {
      ++failed;
      CHECK(std::isnan(rec.y));
      CHECK(std::isnan(rec.z));
    } else {
      CHECK(rec.z >= 0.0);
      CHECK(rec.z <= 1.0);
    }
  }
  CHECK(failed > 0);
  CHECK(r.size() == 20);

  std::stringstream log;
  write_doe_log(log, f, r);
  const auto back = read_doe_log(log, f);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(back[i].failed == r[i].failed);
  std::stringstream wrong("iter,source,a,basin,objective\n");
  CHECK_THROWS_AS(read_doe_log(wrong, f), ValidationError);
}

TEST_CASE("targeted design spreads basin values more evenly than the plain design") {
  const auto f = unit_factors(2);
  const Evaluator g = [](std::span<const double> x, Parallelism) { return ridge(x); };
  auto chi2 = [](const std::vector<double>& ys) {
    std::vector<double> hist(10, 0.0);
    for (double y : ys) hist[static_cast<std::size_t>(std::min(9, static_cast<int>(y * 10)))] += 1;
    const double e = static_cast<double>(ys.size()) / 10;
    double c = 0;
    for (double o : hist) c += (o - e) * (o - e) / e;
    return c;
  };
  double bo = 0, lhs = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::vector<double> a, b;
    for (const auto& r : run_doe(g, f, 10, 40, seed)) a.push_back(r.y);
    const auto d = build_design(f, 40, seed);
    for (Eigen::Index i = 0; i < 40; ++i) {
      const std::vector<double> x{d.points(i, 0), d.points(i, 1)};
      b.push_back(ridge(x));
    }
    bo += chi2(a);
    lhs += chi2(b);
  }
  CHECK(bo < lhs);
}

TEST_CASE("basin evaluator") {
  ModelConfig cfg;
  cfg.beta2 = 2;
  cfg.phi = 0.2;
  cfg.mu = 0.2;
  BasinSpec b;
  b.n_P1 = b.n_P2 = 3;
  b.scenario.integrator.t_end = 100;
  const std::vector<FactorRange> f{{"beta1", 0.5, 6.0}};
  const auto g = basin_evaluator(Variant::simple_reduced, cfg, nullptr, f, b);
  const std::vector<double> lo{0.5}, hi{6.0};
  CHECK(g(lo, {}) == 0.0);
  CHECK(g(hi, {}) == 1.0);
  CHECK_THROWS_AS(basin_evaluator(Variant::simple_reduced, cfg, nullptr, {{"gain", 0, 1}}, b), ValidationError);
  CHECK_THROWS_AS(basin_evaluator(Variant::simple, cfg, nullptr, f, b), ValidationError);
}
