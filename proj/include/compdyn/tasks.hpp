#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "compdyn/run_config.hpp"

namespace compdyn {

struct RunOptions {
  std::filesystem::path out_dir;  // empty: rc.output
  Parallelism par;
  bool svg = false;  // heatmap rendering for basin and heatmap tasks
};

struct RunReport {
  std::filesystem::path out_dir;
  std::vector<std::string> artifacts;  // file names inside out_dir
  nlohmann::json result;               // task summary, also stored in metadata.json
};

/// Runs the configured task and writes its artifacts plus
/// config.resolved.json and metadata.json into the output directory.
/// Inputs are checked before anything is written.
RunReport run_task(const RunConfig& rc, const RunOptions& opt = {});

// Initial state of the simulate task.
std::vector<double> simulate_initial_state(const System& sys, const RunConfig& rc);

// Minimal SVG rendering of a heatmap (greyscale, axis labels only).
void write_heatmap_svg(std::ostream& os, const HeatmapResult& h);

}  // namespace compdyn
