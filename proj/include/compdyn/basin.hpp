#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "compdyn/models.hpp"
#include "compdyn/parallel.hpp"
#include "compdyn/solver.hpp"

namespace compdyn {

/// How the phase part of each initial state is chosen.
enum class PhasePolicy {
  ensemble,    // n_sim random phase draws per cell (full and reduced)
  delta_grid,  // uniform grid of centroid differences (reduced only)
  settled,     // Delta(0) = Delta* at the initial feedback, else 0 (reduced only)
};

std::string_view phase_policy_name(PhasePolicy p);
PhasePolicy parse_phase_policy(std::string_view name);
// ensemble for full variants, settled for reduced ones.
PhasePolicy default_phase_policy(Variant v);

/// Grid over (P1(0), P2(0)) with cell centres (i + 1/2)/n, scaled by the
/// carrying capacity for the dimensional variants. P3(0) is held at
/// P3_fraction * K3.
struct BasinSpec {
  int n_P1 = 51;
  int n_P2 = 51;
  double P3_fraction = 0.5;
  std::optional<PhasePolicy> phase;  // unset: default_phase_policy
  int n_sim = 100;                   // ensemble members per cell
  int delta_resolution = 8;          // per centroid difference, delta_grid
  std::uint64_t seed = 0;
  ScenarioSettings scenario;

  void validate() const;
};

struct BasinResult {
  double value = 0.0;            // mean Blue-win fraction over accepted cells
  Eigen::MatrixXd per_cell;      // (P1 index, P2 index); NaN for failed cells
  int n_evaluated = 0;           // completed scenario runs
  int n_failed_runs = 0;
  int cells_failed = 0;          // excluded from the mean
  double boundary_fraction = 0.0;  // accepted cells whose value differs from a neighbour's
};

// Initial populations of grid cell (i, j).
std::vector<double> basin_cell_populations(const System& sys, const BasinSpec& spec, int i, int j);

/// Blue-win fraction over the initial-population grid. Runs that fail
/// numerically mark their cell failed; failed cells are dropped when they
/// are fewer than 1% of the grid, otherwise NumericalError is thrown.
BasinResult estimate_basin(const System& sys, const BasinSpec& spec, Parallelism par = {});
BasinResult estimate_basin_serial(const System& sys, const BasinSpec& spec);

// Builds the network for a parameter set (phases lags and frequencies
// follow cfg). Not needed by the two-population reduced variants.
using NetworkFactory = std::function<std::shared_ptr<const CoupledNetwork>(const ModelConfig&)>;

struct HeatmapSpec {
  std::string x_param;
  double x_lo = 0.0;
  double x_hi = 1.0;
  int nx = 11;
  std::string y_param;
  double y_lo = 0.0;
  double y_hi = 1.0;
  int ny = 11;

  void validate() const;
};

struct HeatmapResult {
  std::string x_param;
  std::string y_param;
  std::vector<double> x;
  std::vector<double> y;
  Eigen::MatrixXd values;  // ny rows by nx columns
};

// Evenly spaced, endpoints included; a single point sits at lo.
std::vector<double> linspace(double lo, double hi, int n);

HeatmapResult basin_heatmap(Variant v, const ModelConfig& cfg, const NetworkFactory& net, const HeatmapSpec& hs,
                            const BasinSpec& bs, Parallelism par = {});
HeatmapResult basin_heatmap_serial(Variant v, const ModelConfig& cfg, const NetworkFactory& net,
                                   const HeatmapSpec& hs, const BasinSpec& bs);

// First row: "y\x" label then x values; following rows: y value then basin values.
void write_heatmap_csv(std::ostream& os, const HeatmapResult& h);

}  // namespace compdyn
