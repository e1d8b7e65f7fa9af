// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Pass criterion numbers as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "compdyn/doe.hpp"
#include "compdyn/rng.hpp"
#include "compdyn/stats.hpp"
#include "compdyn/tasks.hpp"

using namespace compdyn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kTau = 6.283185307179586;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

IntegratorSettings tight() {
  IntegratorSettings s;
  s.rtol = 1e-11;
  s.atol = 1e-12;
  s.dt_max = 0.05;
  return s;
}

Trajectory centroid_track(double C, double S, double mu, double d0, double t1) {
  const VectorField f = [=](std::span<const double> y, std::span<double> dy) {
    dy[0] = mu + S * std::cos(y[0]) - C * std::sin(y[0]);
  };
  return integrate(f, std::vector<double>{d0}, 0.0, t1, tight()).trajectory;
}

ModelConfig simple_case() { return parse_run_config(find_preset("simple-case").config).params; }
ModelConfig eco2_case() { return parse_run_config(find_preset("eco2-case").config).params; }

const FixedPointRecord* find(const FixedPointSet& s, const std::string& label) {
  for (const auto& r : s.records)
    if (r.label == label) return &r;
  return nullptr;
}

// Interior eco2 roots in P2 at fixed Delta, independent of the library's
// coefficients: eliminate P1 via dP2/dt = 0, clear denominators in
// dP1/dt / P1 = 0, interpolate the cubic through four samples and take the
// companion-matrix eigenvalues.
std::vector<std::complex<double>> companion_roots(const ModelConfig& c, double d) {
  auto blue = [&](double P2) {
    return c.r[1] * (1 - P2) * (1 + c.tau * c.beta1 * P2) / (c.beta1 * 0.5 * (std::sin(d) + 2));
  };
  auto E = [&](double P2) {
    const double red_lead = 0.5 * (std::sin(-d) + 2);
    return c.r[0] * c.alpha * P2 * (1 - blue(P2)) - (c.beta2 * red_lead * P2 + c.x1) * (1 + c.alpha * P2);
  };
  Eigen::Matrix4d V;
  Eigen::Vector4d e;
  const double xs[4] = {-1.0, 0.0, 1.0, 2.0};
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) V(i, k) = std::pow(xs[i], k);
    e(i) = E(xs[i]);
  }
  const Eigen::Vector4d a = V.fullPivLu().solve(e);
  Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
  comp(1, 0) = comp(2, 1) = 1.0;
  for (int k = 0; k < 3; ++k) comp(k, 2) = -a(k) / a(3);
  Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
  std::vector<std::complex<double>> out;
  for (int k = 0; k < 3; ++k) out.push_back(es.eigenvalues()(k));
  return out;
}

Verdict closed_form() {
  std::mt19937_64 g(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst = 0.0;
  for (int done = 0; done < 20;) {
    const double C = u(g), S = u(g), mu = u(g), d0 = u(g);
    if (C * C + S * S - mu * mu <= 0.1) continue;
    const CentroidSolution sol(C, S, mu, d0);
    const Trajectory tr = centroid_track(C, S, mu, d0, 20.0);
    for (int k = 0; k <= 2000; ++k) worst = std::max(worst, std::abs(tr.at(0.01 * k)[0] - sol(0.01 * k)));
    ++done;
  }
  return {worst <= 1e-6, fmt("20 cases, sup error %.2e", worst)};
}

Verdict fixed_point_gate() {
  double worst_res = 0.0, worst_root = 0.0;
  int records = 0, roots = 0;
  bool ok = true;
  std::vector<ModelConfig> simple_cfgs, eco2_cfgs;
  for (double b1 : {1.0, 2.0, 3.0, 5.0}) {
    ModelConfig c = simple_case();
    c.beta1 = b1;
    simple_cfgs.push_back(c);
  }
  for (double b1 : {3.0, 5.0, 7.5}) {
    ModelConfig c = eco2_case();
    c.beta1 = b1;
    eco2_cfgs.push_back(c);
  }
  auto gate = [&](const FixedPointSet& s) {
    for (const auto& r : s.records) {
      ++records;
      worst_res = std::max(worst_res, r.residual);
      ok = ok && r.residual <= 1e-8;
    }
  };
  for (const auto& c : simple_cfgs) gate(simple_fixed_points(c));
  for (const auto& c : eco2_cfgs) {
    const FixedPointSet s = eco2_fixed_points(c);
    gate(s);
    for (const char* label : {"FP3", "FP4", "FP5"}) {
      const auto* r = find(s, label);
      if (!r) continue;
      double best = 1e9;
      for (auto z : companion_roots(c, r->state[2])) best = std::min(best, std::abs(z - r->state[1]));
      worst_root = std::max(worst_root, best);
      ok = ok && best <= 1e-8;
      ++roots;
    }
  }
  ok = ok && roots >= 3;
  return {ok, fmt("%d records, max residual %.1e; %d interior roots, max companion gap %.1e", records, worst_res,
                  roots, worst_root)};
}

Verdict threshold_heatmap() {
  const RunConfig rc = parse_run_config(find_preset("simple-threshold").config);
  if (rc.heatmap.nx != 21 || rc.heatmap.ny != 21 || rc.basin.n_P1 != 11 || rc.basin.n_P2 != 11)
    return {false, "preset grid is not 21x21 with an 11x11 basin"};
  const HeatmapResult h = basin_heatmap(rc.variant, rc.params, nullptr, rc.heatmap, rc.basin);
  const double dx = h.x[1] - h.x[0];
  double worst = 0.0;
  int tracked = 0;
  for (Eigen::Index r = 0; r < h.values.rows(); ++r) {
    ModelConfig c = rc.params;
    c.phi = h.y[static_cast<std::size_t>(r)];
    const auto thr = simple_beta1_threshold(c);
    if (!thr) return {false, fmt("no closed-form threshold at phi = %.2f", c.phi)};
    // First column at or above one half; transition between it and its left neighbour.
    Eigen::Index k = 0;
    while (k < h.values.cols() && !(h.values(r, k) >= 0.5)) ++k;
    if (k == 0 || k == h.values.cols()) return {false, fmt("no transition at phi = %.2f", c.phi)};
    const double lo = h.x[static_cast<std::size_t>(k - 1)], hi = h.x[static_cast<std::size_t>(k)];
    // Distance from the threshold to the bracketing cell, in cells.
    const double miss = std::max({0.0, lo - *thr, *thr - hi}) / dx;
    worst = std::max(worst, miss);
    if (miss <= 1.0) ++tracked;
  }
  return {tracked == h.values.rows(),
          fmt("%d/%d rows bracket the threshold, worst miss %.2f cells", tracked, int(h.values.rows()), worst)};
}

Verdict always_unstable() {
  std::mt19937_64 g(99);
  std::uniform_real_distribution<double> u(0.05, 5.0), ang(-1.5, 1.5);
  int fp3 = 0, fp1 = 0, bad = 0;
  for (int k = 0; k < 100; ++k) {
    ModelConfig c = eco2_case();
    c.r = {u(g), u(g), 1};
    c.beta1 = u(g);
    c.beta2 = u(g);
    c.mu = 0.2 * u(g);
    c.phi = ang(g);
    c.alpha = 4 * u(g);
    if (const auto* r = find(simple_fixed_points(c), "FP3")) {
      ++fp3;
      bad += r->classification != Stability::unstable;
    }
    if (const auto* r = find(eco2_fixed_points(c), "FP1")) {
      ++fp1;
      bad += r->classification != Stability::unstable;
    }
  }
  return {bad == 0 && fp3 > 50 && fp1 > 50,
          fmt("100 draws: simple FP3 present %d, eco2 FP1 present %d, not unstable %d", fp3, fp1, bad)};
}

Verdict discriminant_regimes() {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst_period = 0.0, worst_conv = 0.0;
  for (int done = 0; done < 10;) {
    const double C = u(g), S = u(g), mu = 2.5 * u(g);
    const double K = C * C + S * S - mu * mu;
    if (K > -0.2) continue;
    const double period = kTau / std::sqrt(-K);
    const double t1 = 7.5 * period;
    const Trajectory tr = centroid_track(C, S, mu, 0.0, t1);
    const double dir = mu > 0 ? 1.0 : -1.0;
    // Times at which Delta passes successive multiples of 2 pi.
    std::vector<double> crossings;
    for (int level = 1; level <= 6; ++level) {
      double lo = 0, hi = t1;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (dir * tr.at(mid)[0] < kTau * level ? lo : hi) = mid;
      }
      crossings.push_back(lo);
    }
    for (std::size_t k = 1; k < crossings.size(); ++k)
      worst_period = std::max(worst_period, std::abs((crossings[k] - crossings[k - 1]) / period - 1.0));
    ++done;
  }
  for (int done = 0; done < 10;) {
    const double C = u(g), S = u(g), mu = u(g), d0 = 3 * u(g);
    const double K = C * C + S * S - mu * mu;
    if (K < 0.2) continue;
    const double rate = std::sqrt(K);
    const auto r = integrate(
        [=](std::span<const double> y, std::span<double> dy) { dy[0] = mu + S * std::cos(y[0]) - C * std::sin(y[0]); },
        std::vector<double>{d0}, 0.0, 40.0 / rate + 20.0, tight(), {}, false);
    const double gap = std::remainder(r.y_final[0] - *delta_star(C, S, mu), kTau);
    worst_conv = std::max(worst_conv, std::abs(gap));
    ++done;
  }
  return {worst_period <= 0.02 && worst_conv <= 1e-6,
          fmt("slip period rel. error %.1e (10 cases), distance to Delta* %.1e (10 cases)", worst_period, worst_conv)};
}

struct FidelityRun {
  double sup = 0.0;
  double full_P1 = 0, full_P2 = 0, red_P1 = 0, red_P2 = 0;
};

// Full feedback model against the simple reduction from the same synchronised start.
FidelityRun fidelity(double beta1, std::uint64_t seed) {
  json doc = find_preset("feedback-highsync").config;
  Rng rng(derive_seed(seed, {stream::phases}));
  const double P1 = rng.uniform(0.2, 0.8), P2 = rng.uniform(0.2, 0.8), d0 = rng.uniform(0.0, kTau);
  doc["params"]["beta1"] = beta1;
  doc["network"]["seed"] = seed;
  doc["initial"] = {{"P", {P1, P2}}, {"phases", "synced"}, {"delta", {d0}}};
  const RunConfig rc = parse_run_config(doc);
  const System full = make_system(rc);
  const System reduced(Variant::simple_reduced, rc.params);
  const std::vector<double> yf = simulate_initial_state(full, rc);
  const std::vector<double> yr{P1, P2, d0};
  const auto a = integrate([&](auto y, auto dy) { full.rhs(y, dy); }, yf, 0.0, 20.0, rc.scenario.integrator);
  const auto b = integrate([&](auto y, auto dy) { reduced.rhs(y, dy); }, yr, 0.0, 20.0, rc.scenario.integrator);
  FidelityRun out;
  for (int k = 0; k <= 2000; ++k) {
    const auto ya = a.trajectory.at(0.01 * k), yb = b.trajectory.at(0.01 * k);
    out.sup = std::max({out.sup, std::abs(ya[0] - yb[0]), std::abs(ya[1] - yb[1])});
  }
  out.full_P1 = a.y_final[0];
  out.full_P2 = a.y_final[1];
  out.red_P1 = b.y_final[0];
  out.red_P2 = b.y_final[1];
  return out;
}

Verdict reduction_fidelity() {
  std::string detail = "sup |P_full - P_reduced| on [0,20], beta1 = 2:";
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const FidelityRun f = fidelity(2.0, s);
    worst = std::max(worst, f.sup);
    detail += fmt(" %.3f", f.sup);
  }
  double worst5 = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) worst5 = std::max(worst5, fidelity(5.0, s).sup);
  detail += fmt(" (info: beta1 = 5 worst %.3f)", worst5);

  // Basin against beta1: settled reduced model on the case-study grid, and a
  // coarse phase ensemble of the full feedback model with common seeds.
  const std::vector<double> betas{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  json rdoc = find_preset("simple-case").config;
  apply_overrides(rdoc, {"basin.n_P1=11", "basin.n_P2=11"});
  const RunConfig rrc = parse_run_config(rdoc);
  json fdoc = find_preset("feedback-highsync").config;
  apply_overrides(fdoc, {"task=\"basin\"", "basin.n_P1=3", "basin.n_P2=3", "basin.n_sim=4", "basin.phase=\"ensemble\"",
                         "solver.t_end=40"});
  const RunConfig frc = parse_run_config(fdoc);
  std::vector<double> reduced_basin, full_basin;
  for (double b : betas) {
    ModelConfig c = rrc.params;
    c.beta1 = b;
    reduced_basin.push_back(estimate_basin(System(rrc.variant, c), rrc.basin).value);
    RunConfig fb = frc;
    fb.params.beta1 = b;
    full_basin.push_back(estimate_basin(make_system(fb), fb.basin).value);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < betas.size(); ++k)
    monotone = monotone && reduced_basin[k] >= reduced_basin[k - 1] && full_basin[k] >= full_basin[k - 1];
  monotone = monotone && full_basin.back() > full_basin.front() && reduced_basin.back() > reduced_basin.front();
  detail += "; basin vs beta1 1..6 reduced";
  for (double v : reduced_basin) detail += fmt(" %.2f", v);
  detail += " full";
  for (double v : full_basin) detail += fmt(" %.2f", v);
  return {worst <= 0.05 && monotone, detail};
}

EnsembleStats scenario_case(const std::string& preset, std::optional<double> phi) {
  RunConfig rc = parse_run_config(find_preset(preset).config);
  if (phi) rc.params.phi = *phi;
  const System sys = make_system(rc);
  std::vector<double> P0 = rc.initial.P;
  return ensemble(sys, P0, 20, rc.seed, rc.scenario);
}

Verdict scenario_classes() {
  const EnsembleStats a = scenario_case("scenario-red", std::nullopt);
  const EnsembleStats b = scenario_case("scenario-blue", std::nullopt);
  const double pi = kTau / 2;
  const EnsembleStats ai = scenario_case("scenario-red", -pi / 4);
  const EnsembleStats bi = scenario_case("scenario-blue", pi / 4);
  return {a.red >= 16 && b.blue >= 16,
          fmt("(a) Red %d/20, (b) Blue %d/20; info at phi = -/+pi/4: (a) Red %d/20, (b) Blue %d/20", a.red, b.blue,
              ai.red, bi.blue)};
}

double chi2_to_uniform(const std::vector<double>& ys) {
  std::vector<double> hist(10, 0.0);
  for (double y : ys) hist[static_cast<std::size_t>(std::clamp(static_cast<int>(y * 10), 0, 9))] += 1;
  const double e = static_cast<double>(ys.size()) / 10;
  double c = 0;
  for (double o : hist) c += (o - e) * (o - e) / e;
  return c;
}

Verdict doe_stratification() {
  std::vector<FactorRange> f{{"a", 0.0, 1.0}, {"b", 0.0, 1.0}};
  auto ridge = [](std::span<const double> x) { return 1.0 / (1.0 + std::exp(-25.0 * (x[0] + x[1] - 1.0))); };
  const Evaluator g = [&](std::span<const double> x, Parallelism) { return ridge(x); };
  const int k_init = 10, budget = 40;
  double bo = 0, lhs = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::vector<double> a, b;
    for (const auto& r : run_doe(g, f, k_init, budget, seed)) a.push_back(r.y);
    const DesignMatrix d = build_design(f, budget, seed);
    for (Eigen::Index i = 0; i < budget; ++i) b.push_back(ridge(std::vector<double>{d.points(i, 0), d.points(i, 1)}));
    bo += chi2_to_uniform(a) / 10;
    lhs += chi2_to_uniform(b) / 10;
  }
  return {bo < lhs, fmt("mean chi2 to uniform over 10 seeds: design loop %.2f, Latin hypercube %.2f", bo, lhs)};
}

Verdict glm_checks() {
  bool ok = true;
  Eigen::MatrixXd X3(3, 1);
  X3 << 0.0, 1.0, 2.0;
  const GlmFit f = fit_quasibinomial(X3, Eigen::Vector3d(0.2, 0.5, 0.6));
  const double oracle[] = {-1.1669945297311575, 0.8655429323415229, 0.03666812328828792, -2.9186976005564125,
                           2.888393479862951};
  const double got[] = {f.coefficients(0), f.coefficients(1), f.dispersion, f.t_values(0), f.t_values(1)};
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(got[i] - oracle[i]) / std::max(1.0, std::abs(oracle[i])));
  ok = ok && worst <= 1e-8;

  auto synthetic = [](std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(200, 3);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) {
      for (int j = 0; j < 3; ++j) X(i, j) = rng.uniform();
      const double mu = 1.0 / (1.0 + std::exp(-(-1.0 + 4.0 * X(i, 0) + 0.8 * X(i, 1))));
      y(i) = std::clamp(mu + 0.03 * (rng.uniform() - 0.5), 0.0, 1.0);
    }
    return std::pair{X, y};
  };
  double tele = 0.0;
  int quiet = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto [X, y] = synthetic(s);
    double total = 0;
    for (const auto& r : deviance_anova(X, y)) total += r.percent;
    tele = std::max(tele, std::abs(total - 100.0));
    const GlmFit fit = fit_quasibinomial(X, y);
    quiet += std::abs(permutation_importance(fit, X, y, 20, s)[2]) < 0.01;
  }
  ok = ok && tele <= 1e-9 && quiet >= 19;

  // Format: a design log goes through the reader and the coefficient table
  // comes out with the expected header and one row per term.
  std::ostringstream log;
  log << "iter,source,beta1,phi,basin,objective\n";
  const auto [X, y] = synthetic(3);
  for (int i = 0; i < 30; ++i) log << i << ",nolh," << X(i, 0) << ',' << X(i, 1) << ',' << y(i) << ",0.5\n";
  std::istringstream in(log.str());
  const GlmTable t = read_glm_table(in);
  const GlmFit tf = fit_quasibinomial(t.X, t.y, {.names = t.names});
  std::ostringstream table;
  write_coefficient_table(table, tf, deviance_anova(t.X, t.y, {.names = t.names}));
  std::istringstream rows(table.str());
  std::vector<std::string> lines;
  for (std::string l; std::getline(rows, l);) lines.push_back(l);
  const bool format = lines.size() == 4 && lines[0] == "term,Estimate,Std. Error,t-value,Deviance%" &&
                      lines[1].rfind("(Intercept),", 0) == 0 && lines[2].rfind("beta1,", 0) == 0 &&
                      lines[3].rfind("phi,", 0) == 0;
  ok = ok && format;
  return {ok, fmt("oracle max rel. error %.1e; ANOVA sum off by %.1e; null importance < 0.01 in %d/20; table %s",
                  worst, tele, quiet, format ? "ok" : "malformed")};
}

std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',' || ch == '\n' || ch == ' ' || ch == ':' || ch == '[' || ch == ']' || ch == '{' || ch == '}') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Largest numeric difference between two artifact texts; infinity when the
// non-numeric structure differs.
double artifact_gap(const std::string& a, const std::string& b) {
  const auto ta = tokens(a), tb = tokens(b);
  if (ta.size() != tb.size()) return INFINITY;
  double gap = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i] == tb[i]) continue;
    char* ea = nullptr;
    char* eb = nullptr;
    const double x = std::strtod(ta[i].c_str(), &ea), y = std::strtod(tb[i].c_str(), &eb);
    if (*ea || *eb) return INFINITY;
    gap = std::max(gap, std::abs(x - y) / std::max(1.0, std::abs(x)));
  }
  return gap;
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "compdyn_acceptance_determinism";
  fs::remove_all(root);
  struct Case {
    std::string preset;
    std::vector<std::string> overrides;
  };
  std::vector<Case> cases;
  for (const auto& p : presets()) cases.push_back({p.name, {}});
  cases.push_back({"scenario-blue", {"solver.method=\"rk4\"", "solver.dt_init=0.01"}});
  cases.push_back({"simple-case", {"solver.method=\"rk4\"", "solver.dt_init=0.01", "basin.phase=\"ensemble\"",
                                   "basin.n_sim=4", "basin.n_P1=7", "basin.n_P2=7"}});
  double worst = 0.0;
  int files = 0, fixed_step_mismatch = 0;
  for (const auto& c : cases) {
    json doc = find_preset(c.preset).config;
    apply_overrides(doc, c.overrides);
    const RunConfig rc = parse_run_config(doc);
    const bool fixed = rc.scenario.integrator.method == Method::rk4;
    const fs::path a = root / (c.preset + std::to_string(c.overrides.size()) + "_a");
    const fs::path b = root / (c.preset + std::to_string(c.overrides.size()) + "_b");
    const RunReport ra = run_task(rc, {a, {}, true});
    run_task(rc, {b, {}, true});
    for (const auto& name : ra.artifacts) {
      if (name == "metadata.json") continue;  // carries the wall time
      const std::string x = slurp(a / name), y = slurp(b / name);
      ++files;
      if (fixed && x != y) ++fixed_step_mismatch;
      worst = std::max(worst, artifact_gap(x, y));
    }
    json ma = json::parse(slurp(a / "metadata.json")), mb = json::parse(slurp(b / "metadata.json"));
    ma.erase("wall_time_s");
    mb.erase("wall_time_s");
    if (ma != mb) worst = INFINITY;
  }
  fs::remove_all(root);
  return {worst <= 1e-12 && fixed_step_mismatch == 0,
          fmt("%zu runs twice, %d artifacts, max gap %.1e, fixed-step byte mismatches %d", cases.size(), files, worst,
              fixed_step_mismatch)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    std::string name;
    std::function<Verdict()> check;
    double budget_s;  // wall-time limit, part of the criterion
  };
  const std::vector<Criterion> criteria = {
      {"closed-form centroid dynamics", closed_form, 5},
      {"fixed-point residual gate", fixed_point_gate, 5},
      {"stability threshold reproduction", threshold_heatmap, 120},
      {"trivial points always unstable", always_unstable, 10},
      {"discriminant regimes", discriminant_regimes, 10},
      {"reduction fidelity", reduction_fidelity, 300},
      {"scenario classes", scenario_classes, 120},
      {"design stratification", doe_stratification, 60},
      {"regression oracle", glm_checks, 30},
      {"rerun determinism", determinism, 60},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > criteria[i].budget_s) {
      v.pass = false;
      v.detail += fmt("; over the %.0f s budget", criteria[i].budget_s);
    }
    std::printf("%s %2d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, criteria[i].name.c_str(), v.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
