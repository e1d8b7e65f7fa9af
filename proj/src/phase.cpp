#include "compdyn/phase.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "compdyn/errors.hpp"

namespace compdyn {

double wrap_2pi(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double wrap_pi(double angle) {
  double r = wrap_2pi(angle + kPi) - kPi;
  return r;
}

void kuramoto_rhs(std::span<const double> theta, const CoupledNetwork& net,
                  std::span<const double> feedback, std::span<double> rate) {
  const auto n = static_cast<std::size_t>(net.node_count());
  if (theta.size() != n || feedback.size() != n || rate.size() != n)
    throw ValidationError("kuramoto_rhs: dimension mismatch (network has " + std::to_string(n) +
                          " nodes)");
  const auto& omega = net.omega();
  const auto& rows = net.couplings();
  for (std::size_t k = 0; k < n; ++k) {
    double sum = 0.0;
    const double tk = theta[k];
    for (const auto& c : rows[k]) sum += c.weight * std::sin(theta[static_cast<std::size_t>(c.node)] - tk + c.frustration);
    rate[k] = omega[k] + feedback[k] * sum;
  }
}

std::vector<double> kuramoto_rhs(std::span<const double> theta, const CoupledNetwork& net,
                                 std::span<const double> feedback) {
  std::vector<double> rate(theta.size());
  kuramoto_rhs(theta, net, feedback, rate);
  return rate;
}

double order_parameter(std::span<const double> theta, std::span<const int> subset) {
  if (subset.empty()) throw ValidationError("order_parameter: empty subset");
  double c = 0.0;
  double s = 0.0;
  for (int k : subset) {
    c += std::cos(theta[static_cast<std::size_t>(k)]);
    s += std::sin(theta[static_cast<std::size_t>(k)]);
  }
  const double r = std::hypot(c, s) / static_cast<double>(subset.size());
  return r > 1.0 ? 1.0 : r;
}

double order_parameter(std::span<const double> theta) {
  if (theta.empty()) throw ValidationError("order_parameter: empty subset");
  double c = 0.0;
  double s = 0.0;
  for (double t : theta) {
    c += std::cos(t);
    s += std::sin(t);
  }
  const double r = std::hypot(c, s) / static_cast<double>(theta.size());
  return r > 1.0 ? 1.0 : r;
}

namespace {

// Successive difference mapped into (-pi, pi].
double wrapped_step(double d) {
  d = std::fmod(d, kTwoPi);
  if (d > kPi) d -= kTwoPi;
  if (d <= -kPi) d += kTwoPi;
  return d;
}

}  // namespace

int winding_number(std::span<const double> theta) {
  const std::size_t n = theta.size();
  if (n < 2) return 0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += wrapped_step(theta[(i + 1) % n] - theta[i]);
  return static_cast<int>(std::lround(total / kTwoPi));
}

double circular_centroid(std::span<const double> theta, CentroidMethod method) {
  if (theta.empty()) throw ValidationError("circular_centroid: empty phase set");
  if (method == CentroidMethod::recurrence) {
    double c = wrap_2pi(theta[0]);
    for (std::size_t i = 1; i < theta.size(); ++i) {
      const double d = wrap_2pi(theta[i]) - c;
      // argmin_k |d + 2 pi k| is floor or ceil of -d / (2 pi); ties go to the smaller k.
      const double x = -d / kTwoPi;
      const double lo = std::floor(x);
      const double hi = std::ceil(x);
      const double k = std::abs(d + kTwoPi * lo) <= std::abs(d + kTwoPi * hi) ? lo : hi;
      c += (d + kTwoPi * k) / static_cast<double>(i + 1);
    }
    return wrap_2pi(c);
  }
  double c = wrap_2pi(theta[0]);
  for (std::size_t i = 1; i < theta.size(); ++i) {
    double t = wrap_2pi(theta[i]);
    if (std::abs(t - c) > kPi) t += (c - kPi > 0.0 ? 1.0 : (c - kPi < 0.0 ? -1.0 : 0.0)) * kTwoPi;
    c += (t - c) / static_cast<double>(i + 1);
  }
  return wrap_2pi(c);
}

}  // namespace compdyn
