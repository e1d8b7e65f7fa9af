#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "compdyn/graph.hpp"
#include "compdyn/model_config.hpp"
#include "compdyn/phase.hpp"

namespace compdyn {

/// Coefficients of the centroid-difference flow
///   dDelta/dt = mu + S cos(Delta) - C sin(Delta),
/// with C = g1 H1 cos(phi) + g2 H2 cos(psi), S = g1 H1 sin(phi) - g2 H2 sin(psi)
/// and discriminant K_disc = C^2 + S^2 - mu^2.
struct CentroidCoeffs {
  double C = 0.0;
  double S = 0.0;
  double K_disc = 0.0;
};

CentroidCoeffs centroid_coeffs(double gamma1, double gamma2, double phi, double psi, double mu,
                               double H1, double H2);
// Uses cfg.gamma1, cfg.gamma2, cfg.phi, cfg.psi, cfg.mu.
CentroidCoeffs centroid_coeffs(const ModelConfig& cfg, double H1, double H2);

/// Effective cross couplings g_ij = xi_ij d_T^(ij) / N_i of a three-population
/// network, indices 1-based to match the population labels.
struct Couplings3 {
  double g12 = 0, g13 = 0, g21 = 0, g23 = 0, g31 = 0, g32 = 0;
};
Couplings3 couplings3(const CoupledNetwork& net);

/// Order-parameter factors entering the population rates. All ones for the
/// variants without synchronisation feedback and for reduced models.
struct OrderFactors {
  double strategic[3] = {1.0, 1.0, 1.0};
  double tactical[3] = {1.0, 1.0, 1.0};
};

// Population rates shared by full and reduced variants. `delta` is
// centroid(Blue) - centroid(Red); `dP` has population_count(v) entries.
void population_rates(Variant v, const ModelConfig& cfg, std::span<const double> P, double delta,
                      const OrderFactors& order, std::span<double> dP);

// Reduced flows. State layouts: (P1, P2, Delta) and (P1, P2, P3, Delta1, Delta2).
void simple_reduced_rhs(std::span<const double> y, const ModelConfig& cfg, std::span<double> dy);
void eco2_reduced_rhs(std::span<const double> y, const ModelConfig& cfg, std::span<double> dy);
void eco3_reduced_rhs(std::span<const double> y, const ModelConfig& cfg, const Couplings3& g,
                      std::span<double> dy);

/// Intrinsic frequencies for a network with the given population sizes:
/// Blue and Red draw U[0,1], Green is fixed at 0.5. Blue and Red are then
/// shifted as blocks so that mean(Blue) - mean(Red) = mu and, with three
/// populations, mean(Blue) - mean(Green) = nu.
std::vector<double> draw_omega(const std::vector<int>& sizes, const ModelConfig& cfg,
                               std::uint64_t seed);

/// A model variant bound to its parameters (and network, for the full
/// variants and eco3-reduced). The state vector is
///   full:    [P_1..P_m, theta_0..theta_{N-1}]
///   reduced: [P_1..P_m, Delta_1(, Delta_2)]
class System {
 public:
  System(Variant v, ModelConfig cfg, std::shared_ptr<const CoupledNetwork> net = nullptr,
         CentroidMethod centroid = CentroidMethod::recurrence);

  Variant variant() const { return variant_; }
  const ModelConfig& config() const { return cfg_; }
  const CoupledNetwork* network() const { return net_.get(); }
  std::shared_ptr<const CoupledNetwork> network_ptr() const { return net_; }
  bool reduced() const { return is_reduced(variant_); }
  int populations() const { return pops_; }
  int dimension() const { return dim_; }

  void rhs(std::span<const double> y, std::span<double> dy) const;
  // Reconnaissance flow: populations frozen, phases coupled with H = 1.
  void recon_rhs(std::span<const double> y, std::span<double> dy) const;

  // Phase feedback H per population for the current resources.
  std::vector<double> feedback(std::span<const double> P) const;
  // Centroid difference(s) Blue-Red (and Blue-Green) of a full state.
  std::vector<double> centroid_differences(std::span<const double> y) const;
  OrderFactors order_factors(std::span<const double> y) const;

  std::vector<std::string> state_labels() const;

 private:
  void phase_rates(std::span<const double> theta, std::span<const double> h_pop,
                   std::span<double> rate) const;

  Variant variant_;
  ModelConfig cfg_;
  std::shared_ptr<const CoupledNetwork> net_;
  CentroidMethod centroid_;
  Couplings3 g3_;
  int pops_ = 2;
  int dim_ = 0;
};

}  // namespace compdyn
