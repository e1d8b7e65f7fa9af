#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "compdyn/linalg.hpp"
#include "compdyn/models.hpp"
#include "compdyn/parallel.hpp"
#include "compdyn/solver.hpp"

namespace compdyn {

/// Stable root of dDelta/dt = mu + S cos(Delta) - C sin(Delta), i.e.
/// 2 atan((C - sqrt(K)) / (mu - S)), evaluated in whichever of the two
/// algebraically equal forms has the better-conditioned denominator.
/// Empty when K < 0 (no fixed point).
std::optional<double> delta_star(double C, double S, double mu);

/// Closed-form centroid solution with the integration constant given
/// directly (principal branches, no winding bookkeeping):
///   K > 0: 2 atan((C - sqrt(K) tanh(sqrt(K)(t + c)/2)) / (mu - S))
///   K < 0: 2 atan((C + w tan(w(t + c)/2)) / (mu - S)),  w = sqrt(-K)
/// Requires mu != S.
double delta_closed_form(double t, double C, double S, double mu, double c);

/// Exact solution of the centroid flow for fixed (C, S, mu) through a given
/// Delta(0). Continuous in t: every pole of the tangent substitution adds
/// 2 pi sign(mu - S). Covers K > 0 (tanh or coth branch), K = 0, K < 0 and
/// the degenerate mu = S case, where the substituted flow is linear.
class CentroidSolution {
 public:
  CentroidSolution(double C, double S, double mu, double delta0);
  double operator()(double t) const;
  double discriminant() const { return K_; }
  // Phase-slip period 2 pi / sqrt(-K) when K < 0; infinity otherwise.
  double slip_period() const;

 private:
  enum class Branch { tanh_branch, coth_branch, critical, tan_branch, linear, fixed };
  double C_, S_, mu_, K_;
  double offset_ = 0.0;  // multiple of 2 pi carried from Delta(0)
  double x0_ = 0.0;      // branch argument at t = 0
  double u0_ = 0.0;      // (mu - S) eta(0) - C
  double eta0_ = 0.0;
  Branch branch_ = Branch::fixed;
};

struct FixedPointRecord {
  std::string label;                               // FP1..FP5
  std::vector<double> state;                       // P values then Delta value(s)
  std::vector<std::complex<double>> eigenvalues;   // of the finite-difference Jacobian
  Stability classification = Stability::nonhyperbolic;
  double residual = 0.0;                           // max |rhs| at state
  bool verified = false;                           // residual <= 1e-8
  bool physical = true;                            // populations within [0, 1]
};

struct FixedPointSet {
  std::vector<FixedPointRecord> records;
  std::vector<std::string> diagnostics;  // omitted candidates and why
};

// Fixed points of the two-population reduced flows.
FixedPointSet simple_fixed_points(const ModelConfig& cfg);
FixedPointSet eco2_fixed_points(const ModelConfig& cfg);

/// The cubic a3 P2^3 + a2 P2^2 + a1 P2 + a0 = 0 satisfied by the interior
/// eco2 fixed points at a given Delta*, coefficients highest degree first.
std::array<double, 4> eco2_cubic(const ModelConfig& cfg, double delta);
/// Its three roots from the closed-form Cardano expressions, in the order
/// FP3, FP4, FP5.
std::array<std::complex<double>, 3> eco2_cubic_roots(const ModelConfig& cfg, double delta);

// Reduced right-hand side of a two-population reduced variant.
VectorField reduced_field(Variant v, const ModelConfig& cfg);
// Finite-difference Jacobian of any reduced system (dimension 3 or 5).
Eigen::MatrixXd jacobian(const System& sys, std::span<const double> state);
// Hand-derived Jacobians used to cross-check the finite differences.
Eigen::MatrixXd simple_reduced_jacobian(const ModelConfig& cfg, std::span<const double> state);
Eigen::MatrixXd eco2_reduced_jacobian(const ModelConfig& cfg, std::span<const double> state);

/// Closed-form stability thresholds at a given Delta*.
struct ThresholdReport {
  double delta = 0.0;
  double beta1_min_simple = 0.0;  // Blue-win point stable for beta1 above this
  double beta2_min_simple = 0.0;  // Red-win point stable for beta2 above this
  double beta2_min_eco2 = 0.0;    // Red-win point of the eco2 model
  bool phi_window = false;        // cos(phi - Delta*) > 0
  bool psi_window = false;        // cos(psi + Delta*) > 0
};
ThresholdReport stability_thresholds(const ModelConfig& cfg, double delta);

/// Blue-win threshold of the simple reduced model: r2 / (1 + sin(Delta*)/2)
/// with Delta* taken at the Blue-win point. Empty when that point has no
/// centroid fixed point.
std::optional<double> simple_beta1_threshold(const ModelConfig& cfg);

enum class AttractorClass { fixed_point, limit_cycle, extinction, unresolved };
std::string_view attractor_name(AttractorClass c);

struct SweepRow {
  double value = 0.0;
  FixedPointSet fixed_points;
  AttractorClass attractor = AttractorClass::unresolved;
  std::vector<double> terminal_state;
};

struct SweepSpec {
  std::string param;
  double lo = 0.0;
  double hi = 1.0;
  int n_points = 11;
  std::vector<double> start;  // initial reduced state; default (0.5, 0.5, 0)
  ScenarioSettings scenario;
};

/// One row per grid value: fixed points with stability, plus the attractor
/// reached by a long trajectory from `start`. A limit cycle is reported when
/// the P2 amplitude over the last quarter of the run exceeds 1e-3 and the
/// autocorrelation of P2 shows a repeated period.
std::vector<SweepRow> sweep_bifurcation(Variant v, const ModelConfig& cfg, const SweepSpec& spec,
                                        Parallelism par = {});
std::vector<SweepRow> sweep_bifurcation_serial(Variant v, const ModelConfig& cfg, const SweepSpec& spec);

// Classify the tail of a recorded P2 series sampled on a uniform grid.
AttractorClass classify_tail(const std::vector<double>& p2, double amplitude_tol = 1e-3);

}  // namespace compdyn
