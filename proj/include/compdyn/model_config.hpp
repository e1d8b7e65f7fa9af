#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace compdyn {

/// Scalar parameters of the competition and phase dynamics. Indices 0, 1, 2
/// are Blue, Red, Green. Defaults are the three-population case study.
struct ModelConfig {
  std::array<double, 3> r{3.0, 2.5, 1.0};  // recruitment rates
  double r3_max = 1.5;                     // Green recruitment with Blue present
  double beta1 = 7.5;                      // Blue reduction rate / tactical agility
  double beta2 = 0.2;                      // Red reduction rate
  double beta1_min = 0.1;                  // Blue agility restricted by Green refuge
  double alpha = 2.0;                      // Blue strategic agility
  double tau = 1.0;                        // search and engagement time
  double x1 = 0.25;                        // Blue withdrawal rate
  double x3 = 0.25;                        // Green fatigue
  double x3_min = 0.125;
  double x3_max = 0.5;
  std::array<double, 3> K{10.0, 10.0, 10.0};  // carrying capacities (dimensional model)
  double mu = 0.25;                        // mean frequency difference Blue - Red
  double nu = -0.25;                       // mean frequency difference Blue - Green
  double phi = 0.5;                        // Blue frustration towards Red
  double psi = 0.0;                        // Red frustration towards Blue
  int p_exponent = 1;                      // order-parameter feedback power
  double P_D = 1e-4;                       // extinction threshold
  double gamma1 = 1.0;                     // effective cross couplings, two-population reduced models
  double gamma2 = 1.0;

  // Throws ValidationError naming the first offending field.
  void validate() const;
};

/// Names accepted by set_param / get_param (model parameters only).
const std::vector<std::string>& model_param_names();
bool is_model_param(std::string_view name);
void set_param(ModelConfig& cfg, std::string_view name, double value);
double get_param(const ModelConfig& cfg, std::string_view name);

enum class Variant { simple, simple_reduced, feedback, eco3, eco3_reduced, eco2, eco2_reduced };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);  // throws ValidationError
const std::vector<Variant>& all_variants();

bool is_reduced(Variant v);
int population_count(Variant v);
bool is_dimensional(Variant v);  // eco3 family uses carrying capacities

}  // namespace compdyn
