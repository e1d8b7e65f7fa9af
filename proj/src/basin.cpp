#include "compdyn/basin.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "compdyn/analysis.hpp"
#include "compdyn/rng.hpp"

namespace compdyn {

std::string_view phase_policy_name(PhasePolicy p) {
  switch (p) {
    case PhasePolicy::ensemble: return "ensemble";
    case PhasePolicy::delta_grid: return "delta_grid";
    case PhasePolicy::settled: return "settled";
  }
  return "?";
}

PhasePolicy parse_phase_policy(std::string_view name) {
  for (PhasePolicy p : {PhasePolicy::ensemble, PhasePolicy::delta_grid, PhasePolicy::settled})
    if (phase_policy_name(p) == name) return p;
  throw ValidationError("unknown phase policy '" + std::string(name) + "'");
}

PhasePolicy default_phase_policy(Variant v) { return is_reduced(v) ? PhasePolicy::settled : PhasePolicy::ensemble; }

void BasinSpec::validate() const {
  if (n_P1 < 1 || n_P2 < 1) throw ValidationError("basin: grid resolutions must be >= 1");
  if (!(P3_fraction > 0.0 && P3_fraction <= 1.0)) throw ValidationError("basin: P3_fraction must lie in (0, 1]");
  if (n_sim < 1) throw ValidationError("basin: n_sim must be >= 1");
  if (delta_resolution < 1) throw ValidationError("basin: delta_resolution must be >= 1");
  scenario.integrator.validate();
}

namespace {

struct Plan {
  PhasePolicy policy;
  int members;  // runs per cell
  int cells;
};

Plan make_plan(const System& sys, const BasinSpec& spec) {
  spec.validate();
  Plan p{spec.phase.value_or(default_phase_policy(sys.variant())), 1, spec.n_P1 * spec.n_P2};
  if (p.policy != PhasePolicy::ensemble && !sys.reduced())
    throw ValidationError("basin: phase policy '" + std::string(phase_policy_name(p.policy)) +
                          "' needs a reduced variant");
  if (p.policy == PhasePolicy::ensemble) p.members = spec.n_sim;
  if (p.policy == PhasePolicy::delta_grid)
    p.members = sys.populations() == 3 ? spec.delta_resolution * spec.delta_resolution : spec.delta_resolution;
  return p;
}

// Centroid differences relaxed with populations frozen (three-population
// reduced model, where no closed form is available).
std::vector<double> settle_deltas(const System& sys, std::vector<double> y, const ScenarioSettings& s) {
  const std::size_t pops = static_cast<std::size_t>(sys.populations());
  const VectorField frozen = [&sys, pops](std::span<const double> x, std::span<double> dx) {
    sys.rhs(x, dx);
    for (std::size_t i = 0; i < pops; ++i) dx[i] = 0.0;
  };
  const double T = s.recon_T > 0.0 ? s.recon_T : 50.0;
  return integrate(frozen, y, 0.0, T, s.integrator, {}, false).y_final;
}

std::vector<double> member_state(const System& sys, const BasinSpec& spec, const Plan& plan, int cell, int m) {
  const int i = cell / spec.n_P2, j = cell % spec.n_P2;
  const std::vector<double> P = basin_cell_populations(sys, spec, i, j);
  switch (plan.policy) {
    case PhasePolicy::ensemble:
      return ensemble_member_state(sys, P, derive_seed(spec.seed, {stream::basin, static_cast<std::uint64_t>(cell)}),
                                   m);
    case PhasePolicy::delta_grid: {
      std::vector<double> y = P;
      const int r = spec.delta_resolution;
      auto angle = [r](int k) { return -kPi + kTwoPi * (k + 0.5) / r; };
      y.push_back(angle(m % r));
      if (sys.populations() == 3) y.push_back(angle(m / r));
      return y;
    }
    case PhasePolicy::settled: {
      std::vector<double> y = P;
      if (sys.populations() == 2) {
        const CentroidCoeffs c = centroid_coeffs(sys.config(), 1.0 - P[1], 1.0 - P[0]);
        y.push_back(delta_star(c.C, c.S, sys.config().mu).value_or(0.0));
        return y;
      }
      y.push_back(0.0);
      y.push_back(0.0);
      return settle_deltas(sys, y, spec.scenario);
    }
  }
  return {};
}

// 0 blue, 1 red, 2 stalemate, 3 failed
int run_task(const System& sys, const BasinSpec& spec, const Plan& plan, int task) {
  try {
    const auto y0 = member_state(sys, spec, plan, task / plan.members, task % plan.members);
    return static_cast<int>(run_scenario(sys, y0, spec.scenario).winner);
  } catch (const NumericalError&) {
    return 3;
  }
}

BasinResult aggregate(const BasinSpec& spec, const Plan& plan, const std::vector<int>& codes) {
  BasinResult r;
  r.per_cell.resize(spec.n_P1, spec.n_P2);
  double sum = 0.0;
  for (int cell = 0; cell < plan.cells; ++cell) {
    int blue = 0, done = 0, failed = 0;
    for (int m = 0; m < plan.members; ++m) {
      const int c = codes[static_cast<std::size_t>(cell * plan.members + m)];
      if (c == 3) {
        ++failed;
      } else {
        ++done;
        blue += c == 0;
      }
    }
    r.n_evaluated += done;
    r.n_failed_runs += failed;
    const int i = cell / spec.n_P2, j = cell % spec.n_P2;
    if (failed > 0) {
      ++r.cells_failed;
      r.per_cell(i, j) = std::numeric_limits<double>::quiet_NaN();
    } else {
      r.per_cell(i, j) = static_cast<double>(blue) / done;
      sum += r.per_cell(i, j);
    }
  }
  if (r.cells_failed > 0 && 100 * r.cells_failed >= plan.cells)
    throw NumericalError("basin: " + std::to_string(r.cells_failed) + " of " + std::to_string(plan.cells) +
                         " cells had failed integrations (limit is under 1%)");
  const int accepted = plan.cells - r.cells_failed;
  r.value = sum / accepted;

  int edge = 0;
  for (int i = 0; i < spec.n_P1; ++i)
    for (int j = 0; j < spec.n_P2; ++j) {
      const double v = r.per_cell(i, j);
      if (std::isnan(v)) continue;
      bool differs = false;
      const int di[] = {1, -1, 0, 0}, dj[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int a = i + di[k], b = j + dj[k];
        if (a < 0 || b < 0 || a >= spec.n_P1 || b >= spec.n_P2) continue;
        const double w = r.per_cell(a, b);
        differs = differs || (!std::isnan(w) && w != v);
      }
      edge += differs;
    }
  r.boundary_fraction = static_cast<double>(edge) / accepted;
  return r;
}

}  // namespace

std::vector<double> basin_cell_populations(const System& sys, const BasinSpec& spec, int i, int j) {
  const ModelConfig& cfg = sys.config();
  const bool dim = is_dimensional(sys.variant());
  std::vector<double> P{(i + 0.5) / spec.n_P1, (j + 0.5) / spec.n_P2};
  if (sys.populations() == 3) P.push_back(spec.P3_fraction);
  if (dim)
    for (std::size_t k = 0; k < P.size(); ++k) P[k] *= cfg.K[k];
  return P;
}

BasinResult estimate_basin(const System& sys, const BasinSpec& spec, Parallelism par) {
  const Plan plan = make_plan(sys, spec);
  const int tasks = plan.cells * plan.members;
  std::vector<int> codes(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic) num_threads(resolve_jobs(par))
  for (int t = 0; t < tasks; ++t) codes[static_cast<std::size_t>(t)] = run_task(sys, spec, plan, t);
  return aggregate(spec, plan, codes);
}

BasinResult estimate_basin_serial(const System& sys, const BasinSpec& spec) {
  const Plan plan = make_plan(sys, spec);
  const int tasks = plan.cells * plan.members;
  std::vector<int> codes(static_cast<std::size_t>(tasks));
  for (int t = 0; t < tasks; ++t) codes[static_cast<std::size_t>(t)] = run_task(sys, spec, plan, t);
  return aggregate(spec, plan, codes);
}

void HeatmapSpec::validate() const {
  if (!is_model_param(x_param)) throw ValidationError("heatmap: unknown parameter '" + x_param + "'");
  if (!is_model_param(y_param)) throw ValidationError("heatmap: unknown parameter '" + y_param + "'");
  if (x_param == y_param) throw ValidationError("heatmap: the two parameters must differ");
  if (nx < 1 || ny < 1) throw ValidationError("heatmap: resolutions must be >= 1");
  if (!std::isfinite(x_lo) || !std::isfinite(x_hi) || !std::isfinite(y_lo) || !std::isfinite(y_hi))
    throw ValidationError("heatmap: ranges must be finite");
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(std::max(n, 0)));
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return v;
}

namespace {

System cell_system(Variant v, ModelConfig cfg, const NetworkFactory& net, const HeatmapSpec& hs, double x,
                   double y) {
  set_param(cfg, hs.x_param, x);
  set_param(cfg, hs.y_param, y);
  cfg.validate();
  const bool needs_net = !is_reduced(v) || v == Variant::eco3_reduced;
  if (needs_net && !net) throw ValidationError("heatmap: variant needs a network factory");
  return System(v, cfg, needs_net ? net(cfg) : nullptr);
}

template <class Estimator>
HeatmapResult heatmap(Variant v, const ModelConfig& cfg, const NetworkFactory& net, const HeatmapSpec& hs,
                      const BasinSpec& bs, Estimator estimate) {
  hs.validate();
  bs.validate();
  HeatmapResult h{hs.x_param, hs.y_param, linspace(hs.x_lo, hs.x_hi, hs.nx), linspace(hs.y_lo, hs.y_hi, hs.ny), {}};
  h.values.resize(hs.ny, hs.nx);
  for (int r = 0; r < hs.ny; ++r)
    for (int c = 0; c < hs.nx; ++c) {
      const System sys = cell_system(v, cfg, net, hs, h.x[static_cast<std::size_t>(c)], h.y[static_cast<std::size_t>(r)]);
      h.values(r, c) = estimate(sys, bs).value;
    }
  return h;
}

}  // namespace

HeatmapResult basin_heatmap(Variant v, const ModelConfig& cfg, const NetworkFactory& net, const HeatmapSpec& hs,
                            const BasinSpec& bs, Parallelism par) {
  return heatmap(v, cfg, net, hs, bs,
                 [par](const System& s, const BasinSpec& b) { return estimate_basin(s, b, par); });
}

HeatmapResult basin_heatmap_serial(Variant v, const ModelConfig& cfg, const NetworkFactory& net,
                                   const HeatmapSpec& hs, const BasinSpec& bs) {
  return heatmap(v, cfg, net, hs, bs, [](const System& s, const BasinSpec& b) { return estimate_basin_serial(s, b); });
}

void write_heatmap_csv(std::ostream& os, const HeatmapResult& h) {
  const auto old = os.precision(17);
  os << h.y_param << '\\' << h.x_param;
  for (double x : h.x) os << ',' << x;
  os << '\n';
  for (std::size_t r = 0; r < h.y.size(); ++r) {
    os << h.y[r];
    for (std::size_t c = 0; c < h.x.size(); ++c)
      os << ',' << h.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    os << '\n';
  }
  os.precision(old);
}

}  // namespace compdyn
