#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "compdyn/errors.hpp"
#include "compdyn/tasks.hpp"

using namespace compdyn;
using nlohmann::json;

namespace {

struct RunFlags {
  std::string config;
  std::string preset;
  std::vector<std::string> overrides;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  bool svg = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--preset", f.preset, "start from a shipped preset instead of a file");
  cmd->add_option("--override", f.overrides, "key=value, dotted paths; repeatable")->take_all();
  cmd->add_option("--out", f.out, "output directory (default: the config's output)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--jobs", f.jobs, "worker threads, 0 = all logical cores");
  cmd->add_flag("--svg", f.svg, "also render heatmaps as SVG");
}

json load_config(const RunFlags& f) {
  if (!f.config.empty() && !f.preset.empty()) throw ValidationError("use either --config or --preset");
  if (!f.preset.empty()) return find_preset(f.preset).config;
  if (f.config.empty()) throw ValidationError("--config or --preset required");
  std::ifstream in(f.config);
  if (!in) throw ValidationError("cannot read config " + f.config);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + f.config + " is not valid JSON: " + e.what());
  }
}

int run(const RunFlags& f, const std::optional<std::string>& task) {
  json doc = load_config(f);
  apply_overrides(doc, f.overrides);
  if (task) doc["task"] = *task;
  if (f.seed) doc["seed"] = *f.seed;
  if (!f.out.empty()) doc["output"] = f.out;
  const RunConfig rc = parse_run_config(doc);

  RunOptions opt;
  opt.par.jobs = f.jobs;
  opt.svg = f.svg;
  const RunReport report = run_task(rc, opt);
  std::cout << report.out_dir.string() << ' ' << report.result.dump() << '\n';
  return 0;
}

int list_presets(const std::string& out, bool schema) {
  if (schema) {
    std::cout << config_schema().dump(2) << '\n';
    return 0;
  }
  for (const auto& p : presets()) {
    parse_run_config(p.config);
    std::cout << p.name << "  " << p.description << '\n';
    if (!out.empty()) {
      std::filesystem::create_directories(out);
      std::ofstream os(std::filesystem::path(out) / (p.name + ".json"));
      if (!os) throw ValidationError("cannot write presets to " + out);
      os << p.config.dump(2) << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked decision-making and competition dynamics"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> tasks = {
      {"simulate", "integrate one scenario and write its trajectory"},
      {"fixed-points", "fixed points of a two-population reduced model"},
      {"sweep", "one-parameter fixed-point and attractor sweep"},
      {"basin", "Blue-win basin fraction over initial populations"},
      {"heatmap", "basin fraction over a two-parameter grid"},
      {"doe", "design loop: Latin hypercube then surrogate-guided acquisition"},
      {"glm", "quasi-binomial regression of a design log"},
  };
  std::vector<RunFlags> flags(tasks.size());
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    cmds.push_back(app.add_subcommand(tasks[i].first, tasks[i].second));
    add_run_flags(cmds.back(), flags[i]);
  }
  RunFlags run_flags;
  std::string run_path;
  CLI::App* run_cmd = app.add_subcommand("run", "run whatever task the config names");
  run_cmd->add_option("path", run_path, "JSON run configuration");
  add_run_flags(run_cmd, run_flags);

  std::string presets_out;
  bool schema = false;
  CLI::App* presets_cmd = app.add_subcommand("presets", "list shipped presets");
  presets_cmd->add_option("--out", presets_out, "write every preset as <name>.json into this directory");
  presets_cmd->add_flag("--schema", schema, "print the config JSON schema instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (presets_cmd->parsed()) return list_presets(presets_out, schema);
    if (run_cmd->parsed()) {
      if (!run_path.empty()) {
        if (!run_flags.config.empty()) throw ValidationError("give the config either as a path or with --config");
        run_flags.config = run_path;
      }
      return run(run_flags, std::nullopt);
    }
    for (std::size_t i = 0; i < tasks.size(); ++i)
      if (cmds[i]->parsed()) return run(flags[i], tasks[i].first);
  } catch (const ValidationError& e) {
    std::cerr << "compdyn: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "compdyn: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "compdyn: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
