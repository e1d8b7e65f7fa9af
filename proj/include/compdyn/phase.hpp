#pragma once

#include <span>
#include <vector>

#include "compdyn/graph.hpp"

namespace compdyn {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383280;

// Reduce an angle to [0, 2*pi).
double wrap_2pi(double angle);
// Reduce an angle to [-pi, pi).
double wrap_pi(double angle);

/// dtheta_k/dt = omega_k + H_k * sum_l W_kl sin(theta_l - theta_k + Phi_kl).
/// `feedback` holds H_k per node. Writes into `rate` (same length as theta).
void kuramoto_rhs(std::span<const double> theta, const CoupledNetwork& net,
                  std::span<const double> feedback, std::span<double> rate);

std::vector<double> kuramoto_rhs(std::span<const double> theta, const CoupledNetwork& net,
                                 std::span<const double> feedback);

/// Modulus of the mean unit phasor over `subset` (indices into theta).
double order_parameter(std::span<const double> theta, std::span<const int> subset);
/// Same over every entry of theta.
double order_parameter(std::span<const double> theta);

/// Net number of 2*pi wraps along theta_0, theta_1, ..., theta_{N-1}, theta_0
/// with successive differences wrapped into (-pi, pi].
int winding_number(std::span<const double> theta);

enum class CentroidMethod {
  // Running mean, each new phase shifted by the 2*pi*k closest to the
  // current centroid (ties toward smaller k).
  recurrence,
  // Sketch variant: reduce mod 2*pi, shift by sgn(centroid - pi) * 2*pi when
  // more than pi away.
  sign_shift,
};

/// Circular centroid of a phase set, reported in [0, 2*pi).
double circular_centroid(std::span<const double> theta,
                         CentroidMethod method = CentroidMethod::recurrence);

}  // namespace compdyn
