#include "compdyn/models.hpp"

#include <algorithm>
#include <cmath>

#include "compdyn/errors.hpp"
#include "compdyn/rng.hpp"

namespace compdyn {

namespace {

double power(double o, int n) { return n == 2 ? o * o : o; }

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Initiative factor (sin(lead) + 2) / 2.
double initiative(double lead) { return 0.5 * (std::sin(lead) + 2.0); }

}  // namespace

CentroidCoeffs centroid_coeffs(double gamma1, double gamma2, double phi, double psi, double mu,
                               double H1, double H2) {
  CentroidCoeffs c;
  c.C = gamma1 * H1 * std::cos(phi) + gamma2 * H2 * std::cos(psi);
  c.S = gamma1 * H1 * std::sin(phi) - gamma2 * H2 * std::sin(psi);
  c.K_disc = c.C * c.C + c.S * c.S - mu * mu;
  return c;
}

CentroidCoeffs centroid_coeffs(const ModelConfig& cfg, double H1, double H2) {
  return centroid_coeffs(cfg.gamma1, cfg.gamma2, cfg.phi, cfg.psi, cfg.mu, H1, H2);
}

Couplings3 couplings3(const CoupledNetwork& net) {
  if (net.population_count() != 3) throw ValidationError("three-population network required");
  const DegreeStats stats = degree_stats(net);
  Couplings3 g;
  g.g12 = effective_coupling(net, stats, 0, 1);
  g.g13 = effective_coupling(net, stats, 0, 2);
  g.g21 = effective_coupling(net, stats, 1, 0);
  g.g23 = effective_coupling(net, stats, 1, 2);
  g.g31 = effective_coupling(net, stats, 2, 0);
  g.g32 = effective_coupling(net, stats, 2, 1);
  return g;
}

void population_rates(Variant v, const ModelConfig& cfg, std::span<const double> P, double delta,
                      const OrderFactors& o, std::span<double> dP) {
  const int n = cfg.p_exponent;
  const double P1 = P[0];
  const double P2 = P[1];
  const double blue_lead = initiative(delta);   // sin(c1 - c2)
  const double red_lead = initiative(-delta);   // sin(c2 - c1)
  const double os1 = power(o.strategic[0], n), os2 = power(o.strategic[1], n);
  const double ot1 = power(o.tactical[0], n), ot2 = power(o.tactical[1], n);

  switch (v) {
    case Variant::simple:
    case Variant::simple_reduced:
    case Variant::feedback:
      dP[0] = cfg.r[0] * P1 * (1.0 - P1) * os1 - cfg.beta2 * P1 * P2 * ot2 * red_lead;
      dP[1] = cfg.r[1] * P2 * (1.0 - P2) * os2 - cfg.beta1 * P2 * P1 * ot1 * blue_lead;
      return;
    case Variant::eco2:
    case Variant::eco2_reduced: {
      const double sigmoid = cfg.alpha * P2 / (1.0 + cfg.alpha * P2);
      const double holling = cfg.beta1 * P2 / (1.0 + cfg.tau * cfg.beta1 * P2);
      dP[0] = cfg.r[0] * sigmoid * P1 * (1.0 - P1) * os1 - cfg.beta2 * P1 * P2 * ot2 * red_lead -
              cfg.x1 * P1;
      dP[1] = cfg.r[1] * P2 * (1.0 - P2) * os2 - holling * P1 * ot1 * blue_lead;
      return;
    }
    case Variant::eco3:
    case Variant::eco3_reduced: {
      const double P3 = P[2];
      const double os3 = power(o.strategic[2], n);
      const double r1s = cfg.r[0] * cfg.alpha * P2 / (1.0 + cfg.alpha * P2);
      const double r3s = (cfg.r[2] + cfg.r3_max * P1) / (1.0 + P1);
      const double b1s = (cfg.beta1 + cfg.beta1_min * P3) / (1.0 + P3);
      const double f12 = b1s * P2 / (1.0 + cfg.tau * b1s * P2);
      const double x3s = cfg.x3 - (cfg.x3 - cfg.x3_min) * P1 / (1.0 + P1) +
                         (cfg.x3_max - cfg.x3) * P2 / (1.0 + P2);
      dP[0] = r1s * P1 * (1.0 - P1 / cfg.K[0]) * os1 - cfg.beta2 * P1 * P2 * ot2 * red_lead -
              cfg.x1 * P1;
      dP[1] = cfg.r[1] * P2 * (1.0 - P2 / cfg.K[1]) * os2 - f12 * P1 * ot1 * blue_lead;
      dP[2] = r3s * P3 * (1.0 - P3 / cfg.K[2]) * os3 - x3s * P3;
      return;
    }
  }
}

void simple_reduced_rhs(std::span<const double> y, const ModelConfig& cfg, std::span<double> dy) {
  population_rates(Variant::simple_reduced, cfg, y.first(2), y[2], OrderFactors{}, dy.first(2));
  const CentroidCoeffs c = centroid_coeffs(cfg, 1.0 - y[1], 1.0 - y[0]);
  dy[2] = cfg.mu + c.S * std::cos(y[2]) - c.C * std::sin(y[2]);
}

void eco2_reduced_rhs(std::span<const double> y, const ModelConfig& cfg, std::span<double> dy) {
  population_rates(Variant::eco2_reduced, cfg, y.first(2), y[2], OrderFactors{}, dy.first(2));
  const CentroidCoeffs c = centroid_coeffs(cfg, 1.0 - y[1], 1.0 - y[0]);
  dy[2] = cfg.mu + c.S * std::cos(y[2]) - c.C * std::sin(y[2]);
}

void eco3_reduced_rhs(std::span<const double> y, const ModelConfig& cfg, const Couplings3& g,
                      std::span<double> dy) {
  population_rates(Variant::eco3_reduced, cfg, y.first(3), y[3], OrderFactors{}, dy.first(3));
  const double d1 = y[3];
  const double d2 = y[4];
  const double h1 = 1.0 - y[1];
  const double h2 = 1.0 - y[0];
  const double blue_pull = h1 * (g.g12 * std::sin(d1 - cfg.phi) + g.g13 * std::sin(d2));
  dy[3] = cfg.mu - blue_pull - h2 * (g.g21 * std::sin(d1 + cfg.psi) - g.g23 * std::sin(d2 - d1));
  dy[4] = cfg.nu - blue_pull - g.g31 * std::sin(d2) - g.g32 * std::sin(d2 - d1);
}

std::vector<double> draw_omega(const std::vector<int>& sizes, const ModelConfig& cfg,
                               std::uint64_t seed) {
  if (sizes.size() < 2 || sizes.size() > 3) throw ValidationError("omega: two or three populations expected");
  Rng rng(seed);
  std::vector<std::vector<double>> blocks(sizes.size());
  for (std::size_t p = 0; p < sizes.size(); ++p) {
    blocks[p].resize(static_cast<std::size_t>(sizes[p]));
    for (double& w : blocks[p]) w = p == 2 ? 0.5 : rng.uniform();
  }
  auto mean = [](const std::vector<double>& b) {
    double s = 0.0;
    for (double w : b) s += w;
    return b.empty() ? 0.0 : s / static_cast<double>(b.size());
  };
  auto shift = [](std::vector<double>& b, double by) {
    for (double& w : b) w += by;
  };
  if (sizes.size() == 3) {
    shift(blocks[0], mean(blocks[2]) + cfg.nu - mean(blocks[0]));
    shift(blocks[1], mean(blocks[0]) - cfg.mu - mean(blocks[1]));
  } else {
    shift(blocks[0], mean(blocks[1]) + cfg.mu - mean(blocks[0]));
  }
  std::vector<double> out;
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

System::System(Variant v, ModelConfig cfg, std::shared_ptr<const CoupledNetwork> net,
               CentroidMethod centroid)
    : variant_(v), cfg_(cfg), net_(std::move(net)), centroid_(centroid) {
  cfg_.validate();
  pops_ = population_count(v);
  const bool needs_net = !is_reduced(v) || v == Variant::eco3_reduced;
  if (needs_net) {
    if (!net_) throw ValidationError(std::string(variant_name(v)) + " requires a network");
    if (net_->population_count() != pops_)
      throw ValidationError(std::string(variant_name(v)) + " requires " + std::to_string(pops_) +
                            " populations in the network");
  }
  if (v == Variant::eco3_reduced) g3_ = couplings3(*net_);
  if (is_reduced(v))
    dim_ = pops_ + (pops_ == 3 ? 2 : 1);
  else
    dim_ = pops_ + net_->node_count();
}

std::vector<double> System::feedback(std::span<const double> P) const {
  std::vector<double> h(static_cast<std::size_t>(pops_), 1.0);
  if (is_dimensional(variant_)) {
    h[0] = clamp01(1.0 - P[1] / cfg_.K[1]);
    h[1] = clamp01(1.0 - P[0] / cfg_.K[0]);
  } else {
    h[0] = clamp01(1.0 - P[1]);
    h[1] = clamp01(1.0 - P[0]);
  }
  return h;
}

std::vector<double> System::centroid_differences(std::span<const double> y) const {
  if (reduced()) return {y.begin() + pops_, y.end()};
  const auto theta = y.subspan(static_cast<std::size_t>(pops_));
  std::vector<double> c(static_cast<std::size_t>(pops_));
  for (int p = 0; p < pops_; ++p)
    c[static_cast<std::size_t>(p)] = circular_centroid(
        theta.subspan(static_cast<std::size_t>(net_->offset(p)), static_cast<std::size_t>(net_->size(p))),
        centroid_);
  std::vector<double> d{c[0] - c[1]};
  if (pops_ == 3) d.push_back(c[0] - c[2]);
  return d;
}

OrderFactors System::order_factors(std::span<const double> y) const {
  OrderFactors o;
  if (variant_ == Variant::simple || reduced()) return o;
  const auto theta = y.subspan(static_cast<std::size_t>(pops_));
  for (int p = 0; p < pops_; ++p) {
    const auto& s = net_->strategic_nodes(p);
    const auto& t = net_->tactical_nodes(p);
    if (!s.empty()) o.strategic[p] = order_parameter(theta, s);
    if (!t.empty()) o.tactical[p] = order_parameter(theta, t);
  }
  return o;
}

void System::phase_rates(std::span<const double> theta, std::span<const double> h_pop,
                         std::span<double> rate) const {
  const auto& rows = net_->couplings();
  const auto& omega = net_->omega();
  for (int p = 0; p < pops_; ++p) {
    const double h = h_pop[static_cast<std::size_t>(p)];
    const int begin = net_->offset(p);
    const int end = begin + net_->size(p);
    for (int k = begin; k < end; ++k) {
      double sum = 0.0;
      const double tk = theta[static_cast<std::size_t>(k)];
      for (const Coupling& c : rows[static_cast<std::size_t>(k)])
        sum += c.weight * std::sin(theta[static_cast<std::size_t>(c.node)] - tk + c.frustration);
      rate[static_cast<std::size_t>(k)] = omega[static_cast<std::size_t>(k)] + h * sum;
    }
  }
}

void System::rhs(std::span<const double> y, std::span<double> dy) const {
  if (y.size() != static_cast<std::size_t>(dim_) || dy.size() != y.size())
    throw ValidationError("state dimension mismatch");
  switch (variant_) {
    case Variant::simple_reduced: simple_reduced_rhs(y, cfg_, dy); return;
    case Variant::eco2_reduced: eco2_reduced_rhs(y, cfg_, dy); return;
    case Variant::eco3_reduced: eco3_reduced_rhs(y, cfg_, g3_, dy); return;
    default: break;
  }
  const auto P = y.first(static_cast<std::size_t>(pops_));
  const std::vector<double> d = centroid_differences(y);
  population_rates(variant_, cfg_, P, d[0], order_factors(y), dy.first(static_cast<std::size_t>(pops_)));
  const std::vector<double> h = feedback(P);
  phase_rates(y.subspan(static_cast<std::size_t>(pops_)), h, dy.subspan(static_cast<std::size_t>(pops_)));
}

void System::recon_rhs(std::span<const double> y, std::span<double> dy) const {
  if (reduced()) throw ValidationError("reconnaissance applies to full variants only");
  if (y.size() != static_cast<std::size_t>(dim_) || dy.size() != y.size())
    throw ValidationError("state dimension mismatch");
  for (int p = 0; p < pops_; ++p) dy[static_cast<std::size_t>(p)] = 0.0;
  const std::vector<double> ones(static_cast<std::size_t>(pops_), 1.0);
  phase_rates(y.subspan(static_cast<std::size_t>(pops_)), ones, dy.subspan(static_cast<std::size_t>(pops_)));
}

std::vector<std::string> System::state_labels() const {
  std::vector<std::string> out;
  for (int p = 0; p < pops_; ++p) out.push_back("P" + std::to_string(p + 1));
  if (reduced()) {
    out.emplace_back("Delta1");
    if (pops_ == 3) out.emplace_back("Delta2");
  } else {
    for (int k = 0; k < net_->node_count(); ++k) out.push_back("theta_" + std::to_string(k));
  }
  return out;
}

}  // namespace compdyn
