#include "compdyn/tasks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <Eigen/Core>

#include "compdyn/errors.hpp"
#include "compdyn/stats.hpp"

#ifndef COMPDYN_VERSION
#define COMPDYN_VERSION "unknown"
#endif

namespace compdyn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class ArtifactDir {
 public:
  explicit ArtifactDir(fs::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    if (!created_) {
      std::error_code ec;
      fs::create_directories(dir_, ec);
      if (ec) throw ValidationError("cannot create output directory " + dir_.string() + ": " + ec.message());
      created_ = true;
    }
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw ValidationError("cannot write " + (dir_ / name).string());
    os.precision(17);
    if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
    return os;
  }

  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

  const fs::path& path() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  bool created_ = false;
  std::vector<std::string> names_;
};

// NaN and infinities as JSON null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

bool needs_network(Variant v) { return !is_reduced(v) || v == Variant::eco3_reduced; }

NetworkFactory run_factory(const RunConfig& rc) {
  if (!needs_network(rc.variant)) return {};
  return network_factory(rc.network, population_count(rc.variant), rc.network_seed.value_or(rc.seed));
}

double max_real(const FixedPointRecord& r) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& e : r.eigenvalues) m = std::max(m, e.real());
  return m;
}

json fixed_point_json(const FixedPointRecord& r) {
  json eig = json::array();
  for (const auto& e : r.eigenvalues) eig.push_back({e.real(), e.imag()});
  return {{"label", r.label},           {"state", r.state},     {"eigenvalues", eig},
          {"class", stability_name(r.classification)}, {"residual", r.residual}, {"verified", r.verified},
          {"physical", r.physical}};
}

json task_simulate(const RunConfig& rc, ArtifactDir& out) {
  const System sys = make_system(rc);
  const std::vector<double> y0 = simulate_initial_state(sys, rc);
  ScenarioSettings s = rc.scenario;
  s.record = true;
  const ScenarioOutcome o = run_scenario(sys, y0, s);

  auto os = out.open("trajectory.csv");
  os << 't';
  for (const auto& l : sys.state_labels()) os << ',' << l;
  os << '\n';
  const Trajectory& tr = o.trajectory;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << tr.t[k];
    for (double v : tr.y[k]) os << ',' << v;
    os << '\n';
  }
  std::vector<double> P(o.y_final.begin(), o.y_final.begin() + sys.populations());
  return {{"winner", winner_name(o.winner)}, {"t_event", o.t_event}, {"final_populations", P},
          {"steps", tr.size()}};
}

json task_fixed_points(const RunConfig& rc, ArtifactDir& out) {
  const FixedPointSet set =
      rc.variant == Variant::simple_reduced ? simple_fixed_points(rc.params) : eco2_fixed_points(rc.params);
  auto os = out.open("fixed_points.csv");
  os << "fp_label,P1,P2,Delta1,residual,max_real_eig,class,verified,physical\n";
  json records = json::array();
  for (const auto& r : set.records) {
    os << r.label;
    for (double v : r.state) os << ',' << v;
    os << ',' << r.residual << ',' << max_real(r) << ',' << stability_name(r.classification) << ','
       << (r.verified ? "true" : "false") << ',' << (r.physical ? "true" : "false") << '\n';
    records.push_back(fixed_point_json(r));
  }
  json result = {{"records", records}, {"diagnostics", set.diagnostics}};
  out.write_json("fixed_points.json", result);
  return {{"count", set.records.size()}, {"diagnostics", set.diagnostics}};
}

json task_sweep(const RunConfig& rc, const RunOptions& opt, ArtifactDir& out) {
  const auto rows = sweep_bifurcation(rc.variant, rc.params, rc.sweep, opt.par);
  auto os = out.open("sweep.csv");
  os << "param,fp_label,P1,P2,Delta1,max_real_eig,class\n";
  json attractors = json::array();
  for (const auto& row : rows) {
    for (const auto& r : row.fixed_points.records) {
      os << row.value << ',' << r.label;
      for (double v : r.state) os << ',' << v;
      os << ',' << max_real(r) << ',' << stability_name(r.classification) << '\n';
    }
    // The attractor reached from the start state, one row per value.
    os << row.value << ",attractor";
    for (double v : row.terminal_state) os << ',' << v;
    os << ",," << attractor_name(row.attractor) << '\n';
    attractors.push_back({{"value", row.value}, {"attractor", attractor_name(row.attractor)}});
  }
  return {{"param", rc.sweep.param}, {"points", rows.size()}, {"attractors", attractors}};
}

json basin_json(const BasinResult& b) {
  return {{"value", number(b.value)},           {"n_evaluated", b.n_evaluated},
          {"n_failed_runs", b.n_failed_runs},   {"cells_failed", b.cells_failed},
          {"boundary_fraction", b.boundary_fraction}};
}

json task_basin(const RunConfig& rc, const RunOptions& opt, ArtifactDir& out) {
  const System sys = make_system(rc);
  const BasinResult b = estimate_basin(sys, rc.basin, opt.par);
  HeatmapResult cells;
  cells.x_param = "P1";
  cells.y_param = "P2";
  for (int i = 0; i < rc.basin.n_P1; ++i) cells.x.push_back(basin_cell_populations(sys, rc.basin, i, 0)[0]);
  for (int j = 0; j < rc.basin.n_P2; ++j) cells.y.push_back(basin_cell_populations(sys, rc.basin, 0, j)[1]);
  cells.values = b.per_cell.transpose();
  {
    auto os = out.open("basin_cells.csv");
    write_heatmap_csv(os, cells);
  }
  if (opt.svg) {
    auto os = out.open("basin_cells.svg");
    write_heatmap_svg(os, cells);
  }
  json result = basin_json(b);
  result["phase_policy"] = phase_policy_name(rc.basin.phase.value_or(default_phase_policy(rc.variant)));
  out.write_json("basin.json", result);
  return result;
}

json task_heatmap(const RunConfig& rc, const RunOptions& opt, ArtifactDir& out) {
  const HeatmapResult h = basin_heatmap(rc.variant, rc.params, run_factory(rc), rc.heatmap, rc.basin, opt.par);
  {
    auto os = out.open("heatmap.csv");
    write_heatmap_csv(os, h);
  }
  if (opt.svg) {
    auto os = out.open("heatmap.svg");
    write_heatmap_svg(os, h);
  }
  return {{"x_param", h.x_param}, {"y_param", h.y_param}, {"nx", h.x.size()}, {"ny", h.y.size()},
          {"mean", number(h.values.mean())}};
}

json task_doe(const RunConfig& rc, const RunOptions& opt, ArtifactDir& out) {
  std::vector<DesignRecord> resume;
  if (rc.doe.resume) {
    std::ifstream in(*rc.doe.resume);
    if (!in) throw ValidationError("doe: cannot read resume log " + *rc.doe.resume);
    resume = read_doe_log(in, rc.doe.factors);
  }
  const Evaluator g = basin_evaluator(rc.variant, rc.params, run_factory(rc), rc.doe.factors, rc.basin);
  // The log is rewritten after every iteration so an interrupted run can resume.
  auto checkpoint = [&](const std::vector<DesignRecord>& records) {
    auto os = out.open("doe_log.csv");
    write_doe_log(os, rc.doe.factors, records);
  };
  const auto records =
      run_doe(g, rc.doe.factors, rc.doe.k_init, rc.doe.n_total, rc.seed, rc.doe.bo, opt.par, resume, checkpoint);
  checkpoint(records);
  int failed = 0;
  for (const auto& r : records) failed += r.failed ? 1 : 0;
  return {{"records", records.size()}, {"failed", failed}, {"resumed", resume.size()}};
}

json task_glm(const RunConfig& rc, const RunOptions& opt, ArtifactDir& out) {
  std::ifstream in(rc.glm.input);
  if (!in) throw ValidationError("glm: cannot read " + rc.glm.input);
  const GlmTable t = read_glm_table(in, rc.glm.response, rc.glm.drop, rc.glm.weight);
  std::vector<int> order;
  for (const auto& name : rc.glm.order) {
    const auto it = std::find(t.names.begin(), t.names.end(), name);
    if (it == t.names.end()) throw ValidationError("glm: order names unknown column '" + name + "'");
    order.push_back(static_cast<int>(it - t.names.begin()));
  }
  GlmOptions go;
  go.names = t.names;
  go.weights = t.weights;
  const GlmFit fit = fit_quasibinomial(t.X, t.y, go);
  const auto anova = deviance_anova(t.X, t.y, go, order);
  const auto imp = permutation_importance(fit, t.X, t.y, rc.glm.n_repeats, rc.seed, t.weights, opt.par);

  {
    auto os = out.open("glm_coefficients.csv");
    write_coefficient_table(os, fit, anova);
  }
  {
    auto os = out.open("glm_anova.csv");
    os << "term,deviance,residual_deviance,percent\n";
    for (const auto& r : anova) os << r.term << ',' << r.deviance << ',' << r.residual_deviance << ',' << r.percent << '\n';
  }
  {
    auto os = out.open("glm_importance.csv");
    os << "feature,importance\n";
    for (std::size_t j = 0; j < imp.size(); ++j) os << t.names[j] << ',' << imp[j] << '\n';
  }
  return {{"n", t.y.size()},
          {"converged", fit.converged},
          {"iterations", fit.n_iter},
          {"dispersion", number(fit.dispersion)},
          {"null_deviance", fit.null_deviance},
          {"residual_deviance", fit.residual_deviance}};
}

json versions() {
  return {{"compdyn", COMPDYN_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", __VERSION__},
          {"openmp", _OPENMP}};
}

}  // namespace

std::vector<double> simulate_initial_state(const System& sys, const RunConfig& rc) {
  const int pops = sys.populations();
  std::vector<double> P = rc.initial.P;
  if (P.empty())
    for (int p = 0; p < pops; ++p) P.push_back(is_dimensional(sys.variant()) ? 0.5 * rc.params.K[static_cast<std::size_t>(p)] : 0.5);
  if (rc.initial.phases == "random") return ensemble_member_state(sys, P, rc.seed, rc.initial.member);

  std::vector<double> delta = rc.initial.delta;
  delta.resize(static_cast<std::size_t>(pops - 1), 0.0);
  std::vector<double> y = P;
  if (sys.reduced()) {
    y.insert(y.end(), delta.begin(), delta.end());
    return y;
  }
  // Synchronised start: Red at 0, Blue at Delta1, Green at Delta1 - Delta2.
  const CoupledNetwork& net = *sys.network();
  for (int k = 0; k < net.node_count(); ++k) {
    const int p = net.population_of(k);
    y.push_back(p == 0 ? delta[0] : p == 1 ? 0.0 : delta[0] - delta[1]);
  }
  return y;
}

void write_heatmap_svg(std::ostream& os, const HeatmapResult& h) {
  const int cell = 16, margin = 60;
  const int nx = static_cast<int>(h.x.size()), ny = static_cast<int>(h.y.size());
  const int w = 2 * margin + nx * cell, ht = 2 * margin + ny * cell;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << ht << "\">\n";
  for (int r = 0; r < ny; ++r) {
    for (int c = 0; c < nx; ++c) {
      const double v = h.values(r, c);
      const int level = std::isfinite(v) ? static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))) : -1;
      const std::string fill = level < 0 ? "#ff00ff"
                                         : "rgb(" + std::to_string(255 - level) + "," + std::to_string(255 - level) +
                                               ",255)";
      // Row 0 (lowest y) at the bottom.
      os << "<rect x=\"" << margin + c * cell << "\" y=\"" << margin + (ny - 1 - r) * cell << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  os.precision(4);
  os << "<text x=\"" << w / 2 << "\" y=\"" << ht - 20 << "\" text-anchor=\"middle\">" << h.x_param << " ["
     << h.x.front() << ", " << h.x.back() << "]</text>\n";
  os << "<text x=\"20\" y=\"" << ht / 2 << "\" transform=\"rotate(-90 20 " << ht / 2 << ")\" text-anchor=\"middle\">"
     << h.y_param << " [" << h.y.front() << ", " << h.y.back() << "]</text>\n";
  os << "</svg>\n";
}

RunReport run_task(const RunConfig& rc, const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  ArtifactDir out(opt.out_dir.empty() ? fs::path(rc.output) : opt.out_dir);
  json result;
  switch (rc.task) {
    case Task::simulate: result = task_simulate(rc, out); break;
    case Task::fixed_points: result = task_fixed_points(rc, out); break;
    case Task::sweep: result = task_sweep(rc, opt, out); break;
    case Task::basin: result = task_basin(rc, opt, out); break;
    case Task::heatmap: result = task_heatmap(rc, opt, out); break;
    case Task::doe: result = task_doe(rc, opt, out); break;
    case Task::glm: result = task_glm(rc, opt, out); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.write_json("config.resolved.json", to_json(rc));
  json meta = {{"task", task_name(rc.task)},
               {"model", variant_name(rc.variant)},
               {"config_hash", config_hash(rc)},
               {"seed", rc.seed},
               {"jobs", resolve_jobs(opt.par)},
               {"versions", versions()},
               {"wall_time_s", wall},
               {"result", result}};
  std::vector<std::string> names = out.names();
  names.push_back("metadata.json");
  meta["artifacts"] = names;
  out.write_json("metadata.json", meta);
  return {out.path(), names, result};
}

}  // namespace compdyn
