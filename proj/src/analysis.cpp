#include "compdyn/analysis.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <limits>
#include <sstream>

#include "compdyn/errors.hpp"

namespace compdyn {

namespace {

constexpr double kResidualGate = 1e-8;

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

std::optional<double> delta_star(double C, double S, double mu) {
  const double K = C * C + S * S - mu * mu;
  if (K < 0.0) return std::nullopt;
  const double sk = std::sqrt(K);
  const double d_direct = mu - S;
  const double d_rational = C + sk;
  if (d_direct == 0.0 && d_rational == 0.0) return kPi;
  if (std::abs(d_rational) >= std::abs(d_direct)) return 2.0 * std::atan((mu + S) / d_rational);
  return 2.0 * std::atan((C - sk) / d_direct);
}

double delta_closed_form(double t, double C, double S, double mu, double c) {
  const double m = mu - S;
  if (m == 0.0) throw ValidationError("delta_closed_form: mu == S needs the linear branch (use CentroidSolution)");
  const double K = C * C + S * S - mu * mu;
  if (K >= 0.0) {
    const double sk = std::sqrt(K);
    return 2.0 * std::atan((C - sk * std::tanh(0.5 * sk * (t + c))) / m);
  }
  const double w = std::sqrt(-K);
  return 2.0 * std::atan((C + w * std::tan(0.5 * w * (t + c))) / m);
}

CentroidSolution::CentroidSolution(double C, double S, double mu, double delta0)
    : C_(C), S_(S), mu_(mu), K_(C * C + S * S - mu * mu) {
  const double principal = std::remainder(delta0, kTwoPi);
  offset_ = delta0 - principal;
  eta0_ = std::tan(0.5 * principal);
  const double m = mu_ - S_;
  const double scale = std::max({std::abs(C), std::abs(S), std::abs(mu), 1.0});
  if (std::abs(m) <= 1e-14 * scale) {
    branch_ = Branch::linear;
    return;
  }
  u0_ = m * eta0_ - C_;
  if (K_ > 0.0) {
    const double sk = std::sqrt(K_);
    const double T = -u0_ / sk;  // tanh (or coth) of the branch argument at t = 0
    if (std::abs(T) < 1.0) {
      branch_ = Branch::tanh_branch;
      x0_ = std::atanh(T);
    } else if (std::abs(T) > 1.0) {
      branch_ = Branch::coth_branch;
      x0_ = std::atanh(1.0 / T);
    } else {
      branch_ = Branch::fixed;
    }
  } else if (K_ == 0.0) {
    branch_ = u0_ == 0.0 ? Branch::fixed : Branch::critical;
  } else {
    branch_ = Branch::tan_branch;
    x0_ = std::atan(u0_ / std::sqrt(-K_));
  }
}

double CentroidSolution::operator()(double t) const {
  const double m = mu_ - S_;
  double eta = eta0_;
  double wraps = 0.0;
  switch (branch_) {
    case Branch::fixed:
      return offset_ + 2.0 * std::atan(eta0_);
    case Branch::linear:
      // mu == S: d(eta)/dt = -C eta + mu.
      if (C_ != 0.0)
        eta = mu_ / C_ + (eta0_ - mu_ / C_) * std::exp(-C_ * t);
      else
        eta = eta0_ + mu_ * t;
      return offset_ + 2.0 * std::atan(eta);
    case Branch::tanh_branch: {
      const double sk = std::sqrt(K_);
      eta = (C_ - sk * std::tanh(x0_ + 0.5 * sk * t)) / m;
      break;
    }
    case Branch::coth_branch: {
      const double sk = std::sqrt(K_);
      const double x = x0_ + 0.5 * sk * t;
      eta = (C_ - sk / std::tanh(x)) / m;
      if (x0_ < 0.0 && x > 0.0) wraps = 1.0;
      break;
    }
    case Branch::critical: {
      const double denom = 1.0 - 0.5 * u0_ * t;
      eta = (C_ + u0_ / denom) / m;
      if (u0_ > 0.0 && denom < 0.0) wraps = 1.0;
      break;
    }
    case Branch::tan_branch: {
      const double w = std::sqrt(-K_);
      const double x = x0_ + 0.5 * w * t;
      eta = (C_ + w * std::tan(x)) / m;
      wraps = std::floor((x + 0.5 * kPi) / kPi);
      break;
    }
  }
  return offset_ + 2.0 * std::atan(eta) + kTwoPi * sign(m) * wraps;
}

double CentroidSolution::slip_period() const {
  if (K_ >= 0.0) return std::numeric_limits<double>::infinity();
  return kTwoPi / std::sqrt(-K_);
}

VectorField reduced_field(Variant v, const ModelConfig& cfg) {
  switch (v) {
    case Variant::simple_reduced:
      return [cfg](std::span<const double> y, std::span<double> dy) { simple_reduced_rhs(y, cfg, dy); };
    case Variant::eco2_reduced:
      return [cfg](std::span<const double> y, std::span<double> dy) { eco2_reduced_rhs(y, cfg, dy); };
    default:
      throw ValidationError("reduced_field: two-population reduced variant required");
  }
}

Eigen::MatrixXd jacobian(const System& sys, std::span<const double> state) {
  if (!sys.reduced()) throw ValidationError("jacobian: reduced variant required");
  const VectorField f = [&sys](std::span<const double> y, std::span<double> dy) { sys.rhs(y, dy); };
  return fd_jacobian(f, state);
}

Eigen::MatrixXd simple_reduced_jacobian(const ModelConfig& cfg, std::span<const double> s) {
  const double P1 = s[0], P2 = s[1], D = s[2];
  const double sn = std::sin(D), cs = std::cos(D);
  const CentroidCoeffs c = centroid_coeffs(cfg, 1.0 - P2, 1.0 - P1);
  Eigen::MatrixXd j(3, 3);
  j(0, 0) = cfg.r[0] * (1.0 - 2.0 * P1) + 0.5 * cfg.beta2 * P2 * (sn - 2.0);
  j(0, 1) = 0.5 * cfg.beta2 * P1 * (sn - 2.0);
  j(0, 2) = 0.5 * cfg.beta2 * P1 * P2 * cs;
  j(1, 0) = -0.5 * cfg.beta1 * P2 * (sn + 2.0);
  j(1, 1) = cfg.r[1] * (1.0 - 2.0 * P2) - 0.5 * cfg.beta1 * P1 * (sn + 2.0);
  j(1, 2) = -0.5 * cfg.beta1 * P1 * P2 * cs;
  j(2, 0) = cfg.gamma2 * std::sin(cfg.psi + D);
  j(2, 1) = cfg.gamma1 * std::sin(D - cfg.phi);
  j(2, 2) = -c.S * sn - c.C * cs;
  return j;
}

Eigen::MatrixXd eco2_reduced_jacobian(const ModelConfig& cfg, std::span<const double> s) {
  const double P1 = s[0], P2 = s[1], D = s[2];
  const double sn = std::sin(D), cs = std::cos(D);
  const double a = cfg.alpha, b1 = cfg.beta1, b2 = cfg.beta2, tau = cfg.tau;
  const double sig = a * P2 / (1.0 + a * P2);
  const double dsig = a / ((1.0 + a * P2) * (1.0 + a * P2));
  const double hol = b1 * P2 / (1.0 + tau * b1 * P2);
  const double dhol = b1 / ((1.0 + tau * b1 * P2) * (1.0 + tau * b1 * P2));
  const CentroidCoeffs c = centroid_coeffs(cfg, 1.0 - P2, 1.0 - P1);
  Eigen::MatrixXd j(3, 3);
  j(0, 0) = cfg.r[0] * sig * (1.0 - 2.0 * P1) + 0.5 * b2 * P2 * (sn - 2.0) - cfg.x1;
  j(0, 1) = cfg.r[0] * dsig * P1 * (1.0 - P1) + 0.5 * b2 * P1 * (sn - 2.0);
  j(0, 2) = 0.5 * b2 * P1 * P2 * cs;
  j(1, 0) = -0.5 * hol * (sn + 2.0);
  j(1, 1) = cfg.r[1] * (1.0 - 2.0 * P2) - 0.5 * dhol * P1 * (sn + 2.0);
  j(1, 2) = -0.5 * hol * P1 * cs;
  j(2, 0) = cfg.gamma2 * std::sin(cfg.psi + D);
  j(2, 1) = cfg.gamma1 * std::sin(D - cfg.phi);
  j(2, 2) = -c.S * sn - c.C * cs;
  return j;
}

namespace {

// Newton iteration on a reduced residual; returns true when max|f| <= tol.
bool newton_polish(const VectorField& f, std::vector<double>& x, double tol = 1e-13, int max_iter = 50) {
  std::vector<double> fx(x.size());
  f(x, fx);
  for (int it = 0; it < max_iter && max_abs(fx) > tol; ++it) {
    const Eigen::MatrixXd j = fd_jacobian(f, x);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = fx[i];
    const Eigen::VectorXd step = j.colPivHouseholderQr().solve(rhs);
    if (!step.allFinite()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= step(static_cast<Eigen::Index>(i));
    f(x, fx);
    if (step.lpNorm<Eigen::Infinity>() < 1e-16 * (1.0 + max_abs(x))) break;
  }
  return max_abs(fx) <= kResidualGate;
}

// Residual gate, stability and bookkeeping shared by both models.
void finalize(FixedPointSet& set, const VectorField& f, std::string label, std::vector<double> state) {
  std::vector<double> fx(state.size());
  f(state, fx);
  if (max_abs(fx) > kResidualGate) newton_polish(f, state);
  f(state, fx);
  const double residual = max_abs(fx);
  if (!(residual <= kResidualGate)) {
    set.diagnostics.push_back(label + ": residual " + fmt(residual) + " above gate, omitted");
    return;
  }
  for (const auto& r : set.records) {
    double gap = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) gap = std::max(gap, std::abs(r.state[i] - state[i]));
    if (gap < 1e-7) {
      set.diagnostics.push_back(label + ": coincides with " + r.label + ", omitted");
      return;
    }
  }
  FixedPointRecord rec;
  rec.label = std::move(label);
  rec.residual = residual;
  rec.verified = true;
  rec.eigenvalues = eigenvalues(fd_jacobian(f, state));
  rec.classification = classify(rec.eigenvalues);
  rec.physical = state[0] >= -1e-12 && state[0] <= 1.0 + 1e-12 && state[1] >= -1e-12 && state[1] <= 1.0 + 1e-12;
  rec.state = std::move(state);
  set.records.push_back(std::move(rec));
}

// Corner fixed point (P1, P2) with Delta* at its feedback values.
void corner(FixedPointSet& set, const ModelConfig& cfg, const VectorField& f, const std::string& label, double P1,
            double P2) {
  const CentroidCoeffs c = centroid_coeffs(cfg, 1.0 - P2, 1.0 - P1);
  const auto d = delta_star(c.C, c.S, cfg.mu);
  if (!d) {
    set.diagnostics.push_back(label + ": no fixed point exists (C^2 + S^2 < mu^2)");
    return;
  }
  finalize(set, f, label, {P1, P2, *d});
}

}  // namespace

namespace {

// Delta* at the feedback of (P1, P2) for a two-population reduced model.
std::optional<double> delta_star_at(const ModelConfig& cfg, double P1, double P2) {
  const CentroidCoeffs c = centroid_coeffs(cfg, 1.0 - P2, 1.0 - P1);
  return delta_star(c.C, c.S, cfg.mu);
}

// Newton can land on the repelling zero of the centroid flow; only the
// attracting branch Delta* is a fixed point in the sense used here.
bool on_attracting_branch(const ModelConfig& cfg, std::span<const double> x) {
  const auto d = delta_star_at(cfg, x[0], x[1]);
  return d && std::abs(std::remainder(x[2] - *d, kTwoPi)) < 1e-6;
}

}  // namespace

FixedPointSet simple_fixed_points(const ModelConfig& cfg) {
  cfg.validate();
  FixedPointSet set;
  const VectorField f = reduced_field(Variant::simple_reduced, cfg);
  corner(set, cfg, f, "FP1", 1.0, 0.0);
  corner(set, cfg, f, "FP2", 0.0, 1.0);
  corner(set, cfg, f, "FP3", 0.0, 0.0);

  const double r1 = cfg.r[0], r2 = cfg.r[1], b1 = cfg.beta1, b2 = cfg.beta2;
  auto populations = [&](double d, double& P1, double& P2) {
    const double s = std::sin(d);
    const double den = 4.0 * r1 * r2 + b1 * b2 * (s * s - 4.0);
    P1 = 2.0 * r2 * (2.0 * r1 + b2 * s - 2.0 * b2) / den;
    P2 = 2.0 * r1 * (2.0 * r2 - b1 * s - 2.0 * b1) / den;
  };

  // Damped cyclic iteration: populations from Delta*, then Delta* from them.
  double d = 0.0;
  double P1 = 0.0, P2 = 0.0;
  populations(d, P1, P2);
  bool converged = false;
  std::string why = "no convergence in 10^4 iterations";
  for (int it = 0; it < 10000; ++it) {
    double n1, n2;
    populations(d, n1, n2);
    if (!std::isfinite(n1) || !std::isfinite(n2)) {
      why = "singular population formula";
      break;
    }
    const double q1 = 0.5 * (P1 + n1), q2 = 0.5 * (P2 + n2);
    const CentroidCoeffs c = centroid_coeffs(cfg, 1.0 - q2, 1.0 - q1);
    const auto ds = delta_star(c.C, c.S, cfg.mu);
    if (!ds) {
      why = "C^2 + S^2 < mu^2 along the iteration";
      break;
    }
    const double dn = 0.5 * (d + *ds);
    const double change = std::max({std::abs(q1 - P1), std::abs(q2 - P2), std::abs(dn - d)});
    P1 = q1;
    P2 = q2;
    d = dn;
    if (change < 1e-12) {
      converged = true;
      break;
    }
  }
  std::vector<double> x{P1, P2, d};
  if (!converged) {
    if (!(std::isfinite(P1) && std::isfinite(P2) && newton_polish(f, x) && on_attracting_branch(cfg, x))) {
      set.diagnostics.push_back("FP4: " + why + "; Newton fallback failed, omitted");
      return set;
    }
    set.diagnostics.push_back("FP4: " + why + "; recovered by Newton");
  }
  finalize(set, f, "FP4", x);
  return set;
}

std::array<double, 4> eco2_cubic(const ModelConfig& cfg, double delta) {
  const double r1 = cfg.r[0], r2 = cfg.r[1], a = cfg.alpha, b1 = cfg.beta1, tau = cfg.tau, x1 = cfg.x1;
  const double b2t = cfg.beta2 * 0.5 * (std::sin(-delta) + 2.0);
  const double dl = 0.5 * (std::sin(delta) + 2.0);
  return {a * b1 * r1 * r2 * tau, -a * (b2t * b1 * dl + b1 * r1 * r2 * tau - r1 * r2),
          a * b1 * dl * r1 - a * b1 * dl * x1 - a * r1 * r2 - b2t * b1 * dl, -b1 * dl * x1};
}

std::array<std::complex<double>, 3> eco2_cubic_roots(const ModelConfig& cfg, double delta) {
  using C = std::complex<double>;
  const double r1 = cfg.r[0], r2 = cfg.r[1], a = cfg.alpha, b1 = cfg.beta1, tau = cfg.tau, x1 = cfg.x1;
  const double bt = cfg.beta2 * 0.5 * (std::sin(-delta) + 2.0);
  const double dl = 0.5 * (std::sin(delta) + 2.0);
  const auto coef = eco2_cubic(cfg, delta);
  const double a3 = coef[0];

  std::array<C, 3> roots;
  if (std::abs(a3) < 1e-300) {
    // Degenerate (tau or a rate is zero): the cubic drops to a quadratic.
    const double qa = coef[1], qb = coef[2], qc = coef[3];
    if (qa == 0.0) {
      roots = {C(qb == 0.0 ? std::nan("") : -qc / qb), C(std::nan("")), C(std::nan(""))};
    } else {
      const C disc = std::sqrt(C(qb * qb - 4.0 * qa * qc));
      roots = {(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa), C(std::nan(""))};
    }
    return roots;
  }

  const double xs = (2.0 * a + 3.0) * b1 * bt * tau - 2.0 * a * bt + 3.0 * a * b1 * tau * x1;
  const double F1 = a * (b1 * dl * bt + (b1 * tau - 1.0) * r1 * r2);
  const double F2 = a * (a * b1 * b1 * dl * dl * bt * bt + b1 * dl * xs * r1 * r2 +
                         a * r1 * r1 * r2 * (-3.0 * b1 * b1 * dl * tau + (1.0 + b1 * tau + b1 * b1 * tau * tau) * r2));
  const double chi =
      a * a *
      (2.0 * b1 * b1 * b1 * a * dl * dl * dl * bt * bt * bt + 3.0 * b1 * b1 * dl * dl * bt * xs * r1 * r2 +
       (b1 * tau - 1.0) * a * r1 * r1 * r1 * r2 * r2 *
           (-9.0 * b1 * b1 * dl * tau + (2.0 + 5.0 * b1 * tau + 2.0 * b1 * b1 * tau * tau) * r2) +
       3.0 * b1 * dl * r1 * r1 * r2 *
           (-3.0 * a * b1 * b1 * dl * tau * bt + r2 * (-xs + b1 * tau * (xs + 3.0 * a * bt + 9.0 * b1 * tau * x1))));
  // Pick the square-root sign that keeps F3 away from zero.
  const C root = std::sqrt(C(chi * chi - 4.0 * F2 * F2 * F2));
  const C plus = chi + root, minus = chi - root;
  const C F3 = std::pow(std::abs(plus) >= std::abs(minus) ? plus : minus, 1.0 / 3.0);

  const double c43 = std::cbrt(16.0);  // 2^(4/3)
  const double c23 = std::cbrt(4.0);   // 2^(2/3)
  const C i3(0.0, std::sqrt(3.0));
  if (std::abs(F3) == 0.0) {
    roots.fill(C(F1 / (3.0 * a3)));
  } else {
    roots[0] = (2.0 * F1 + c43 * F2 / F3 + c23 * F3) / (6.0 * a3);
    roots[1] = (4.0 * F1 - c43 * (1.0 + i3) * F2 / F3 - c23 * (1.0 - i3) * F3) / (12.0 * a3);
    roots[2] = (4.0 * F1 - c43 * (1.0 - i3) * F2 / F3 - c23 * (1.0 + i3) * F3) / (12.0 * a3);
  }
  // Two Newton steps on the cubic itself clean up cancellation error.
  for (C& z : roots) {
    for (int k = 0; k < 2; ++k) {
      const C p = ((coef[0] * z + coef[1]) * z + coef[2]) * z + coef[3];
      const C dp = (3.0 * coef[0] * z + 2.0 * coef[1]) * z + coef[2];
      if (std::abs(dp) == 0.0) break;
      z -= p / dp;
    }
  }
  return roots;
}


FixedPointSet eco2_fixed_points(const ModelConfig& cfg) {
  cfg.validate();
  FixedPointSet set;
  const VectorField f = reduced_field(Variant::eco2_reduced, cfg);
  corner(set, cfg, f, "FP1", 0.0, 0.0);
  corner(set, cfg, f, "FP2", 0.0, 1.0);

  const double b1 = cfg.beta1, tau = cfg.tau, r2 = cfg.r[1];
  if (b1 == 0.0) {
    set.diagnostics.push_back("FP3-FP5: beta1 = 0, back-substitution undefined");
    return set;
  }
  auto blue_of = [&](double P2, double d) {
    const double dl = 0.5 * (std::sin(d) + 2.0);
    return r2 / (b1 * dl) * (1.0 - P2) * (1.0 + tau * b1 * P2);
  };
  auto real_roots = [&](double d) {
    std::vector<double> out;
    for (const auto& z : eco2_cubic_roots(cfg, d))
      if (std::isfinite(z.real()) && std::abs(z.imag()) <= 1e-8) out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
  };

  std::vector<std::vector<double>> candidates;

  // Each cube-root branch coupled to Delta* by damped iteration, following
  // the nearest root as Delta* moves.
  const double d_start = delta_star_at(cfg, 0.0, 0.0).value_or(0.0);
  const auto start_roots = eco2_cubic_roots(cfg, d_start);
  for (int j = 0; j < 3; ++j) {
    const std::string label = "branch " + std::to_string(j + 1);
    std::complex<double> z = start_roots[static_cast<std::size_t>(j)];
    if (!std::isfinite(z.real())) continue;
    double d = d_start;
    bool converged = false;
    bool defined = true;
    for (int it = 0; it < 10000 && defined; ++it) {
      const auto ds = delta_star_at(cfg, blue_of(z.real(), d), z.real());
      if (!ds) {
        defined = false;
        break;
      }
      const double dn = 0.5 * (d + *ds);
      const auto roots = eco2_cubic_roots(cfg, dn);
      std::complex<double> next = roots[0];
      for (const auto& r : roots)
        if (std::abs(r - z) < std::abs(next - z)) next = r;
      const double change = std::max(std::abs(next - z), std::abs(dn - d));
      z = next;
      d = dn;
      if (change < 1e-12) {
        converged = true;
        break;
      }
    }
    if (std::abs(z.imag()) > 1e-8) {
      set.diagnostics.push_back(label + ": complex root (imaginary part " + fmt(z.imag()) + ")");
      continue;
    }
    std::vector<double> x{blue_of(z.real(), d), z.real(), d};
    if (!converged) {
      if (!(newton_polish(f, x) && on_attracting_branch(cfg, x))) {
        set.diagnostics.push_back(label + ": iteration did not converge; Newton fallback failed");
        continue;
      }
      set.diagnostics.push_back(label + ": iteration did not converge; recovered by Newton");
    }
    candidates.push_back(std::move(x));
  }

  // The cyclic iteration can collapse two branches onto one attractor of
  // the map, so also bracket every zero of Delta*(P(Delta)) - Delta along
  // each real root branch.
  auto gap = [&](double d, std::size_t j, std::size_t count, double& P2) -> std::optional<double> {
    const auto roots = real_roots(d);
    if (roots.size() != count || j >= count) return std::nullopt;
    P2 = roots[j];
    const auto ds = delta_star_at(cfg, blue_of(P2, d), P2);
    if (!ds) return std::nullopt;
    return std::remainder(*ds - d, kTwoPi);
  };
  constexpr int scan = 720;
  for (int k = 0; k < scan; ++k) {
    const double a = -kPi + kTwoPi * k / scan, b = -kPi + kTwoPi * (k + 1) / scan;
    const std::size_t count = real_roots(a).size();
    for (std::size_t j = 0; j < count; ++j) {
      double P2a = 0.0, P2b = 0.0;
      const auto ga = gap(a, j, count, P2a);
      const auto gb = gap(b, j, count, P2b);
      if (!ga || !gb || (*ga > 0.0) == (*gb > 0.0) || std::abs(*ga - *gb) > kPi) continue;
      double lo = a, hi = b, glo = *ga, P2 = P2a;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto gm = gap(mid, j, count, P2);
        if (!gm) break;
        if ((*gm > 0.0) == (glo > 0.0)) {
          lo = mid;
          glo = *gm;
        } else {
          hi = mid;
        }
      }
      const double d = 0.5 * (lo + hi);
      if (gap(d, j, count, P2)) candidates.push_back({blue_of(P2, d), P2, d});
    }
  }

  // Polish, gate, deduplicate and label by the cube-root branch each
  // point sits on.
  std::vector<std::vector<double>> accepted;
  for (auto& x : candidates) {
    newton_polish(f, x);
    if (!on_attracting_branch(cfg, x)) continue;
    x[2] = *delta_star_at(cfg, x[0], x[1]) + (x[2] - std::remainder(x[2], kTwoPi));
    bool dup = false;
    for (const auto& y : accepted)
      dup = dup || (std::abs(y[0] - x[0]) < 1e-7 && std::abs(y[1] - x[1]) < 1e-7 &&
                    std::abs(std::remainder(y[2] - x[2], kTwoPi)) < 1e-7);
    if (!dup && std::max(std::abs(x[1]), std::abs(x[1] - 1.0)) > 1e-9 && std::abs(x[0]) > 1e-9)
      accepted.push_back(x);
  }
  std::sort(accepted.begin(), accepted.end(), [](const auto& p, const auto& q) { return p[1] > q[1]; });
  bool used[3] = {false, false, false};
  for (const auto& x : accepted) {
    const auto roots = eco2_cubic_roots(cfg, x[2]);
    int best = -1;
    for (int j = 0; j < 3; ++j) {
      if (used[j]) continue;
      if (best < 0 || std::abs(roots[static_cast<std::size_t>(j)] - x[1]) <
                          std::abs(roots[static_cast<std::size_t>(best)] - x[1]))
        best = j;
    }
    if (best < 0) {
      set.diagnostics.push_back("more than three interior fixed points found; extra omitted");
      break;
    }
    used[best] = true;
    const std::string label = "FP" + std::to_string(3 + best);
    const std::size_t before = set.records.size();
    finalize(set, f, label, x);
    if (set.records.size() > before && !set.records.back().physical)
      set.diagnostics.push_back(label + ": outside physical range");
  }
  for (int j = 0; j < 3; ++j)
    if (!used[j]) set.diagnostics.push_back("FP" + std::to_string(3 + j) + ": no real root on this branch");
  std::sort(set.records.begin(), set.records.end(),
            [](const FixedPointRecord& a, const FixedPointRecord& b) { return a.label < b.label; });
  return set;
}

ThresholdReport stability_thresholds(const ModelConfig& cfg, double delta) {
  ThresholdReport t;
  t.delta = delta;
  const double s = std::sin(delta);
  t.beta1_min_simple = cfg.r[1] / (1.0 + 0.5 * s);
  t.beta2_min_simple = cfg.r[0] / (1.0 - 0.5 * s);
  t.beta2_min_eco2 = (cfg.alpha * cfg.r[0] / (1.0 + cfg.alpha) - cfg.x1) / (1.0 - 0.5 * s);
  t.phi_window = std::cos(cfg.phi - delta) > 0.0;
  t.psi_window = std::cos(cfg.psi + delta) > 0.0;
  return t;
}

std::optional<double> simple_beta1_threshold(const ModelConfig& cfg) {
  const CentroidCoeffs c = centroid_coeffs(cfg, 1.0, 0.0);
  const auto d = delta_star(c.C, c.S, cfg.mu);
  if (!d) return std::nullopt;
  return stability_thresholds(cfg, *d).beta1_min_simple;
}

std::string_view attractor_name(AttractorClass c) {
  switch (c) {
    case AttractorClass::fixed_point: return "fixed-point";
    case AttractorClass::limit_cycle: return "limit-cycle";
    case AttractorClass::extinction: return "extinction";
    case AttractorClass::unresolved: return "unresolved";
  }
  return "?";
}

AttractorClass classify_tail(const std::vector<double>& p2, double amplitude_tol) {
  if (p2.size() < 8) return AttractorClass::unresolved;
  const auto [lo, hi] = std::minmax_element(p2.begin(), p2.end());
  if (*hi - *lo <= amplitude_tol) return AttractorClass::fixed_point;
  double mean = 0.0;
  for (double v : p2) mean += v;
  mean /= static_cast<double>(p2.size());
  const std::size_t n = p2.size();
  double var = 0.0;
  for (double v : p2) var += (v - mean) * (v - mean);
  if (var == 0.0) return AttractorClass::fixed_point;
  auto acf = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (p2[i] - mean) * (p2[i + lag] - mean);
    return s / var * static_cast<double>(n) / static_cast<double>(n - lag);
  };
  // First peak after the first zero crossing marks the period.
  bool crossed = false;
  double prev = acf(1);
  for (std::size_t lag = 2; lag < n / 2; ++lag) {
    const double cur = acf(lag);
    if (!crossed && cur < 0.0) crossed = true;
    if (crossed && cur < prev && prev > 0.5) return AttractorClass::limit_cycle;
    prev = cur;
  }
  return AttractorClass::unresolved;
}

namespace {

SweepRow sweep_point(Variant v, const ModelConfig& base, const SweepSpec& spec, int i) {
  SweepRow row;
  row.value = spec.n_points == 1 ? spec.lo
                                 : spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) / (spec.n_points - 1);
  ModelConfig cfg = base;
  set_param(cfg, spec.param, row.value);
  if (v == Variant::simple_reduced)
    row.fixed_points = simple_fixed_points(cfg);
  else if (v == Variant::eco2_reduced)
    row.fixed_points = eco2_fixed_points(cfg);
  else
    row.fixed_points.diagnostics.push_back("no analytic fixed points for " + std::string(variant_name(v)));

  System sys(v, cfg, nullptr);
  std::vector<double> y0 = spec.start;
  if (y0.empty()) {
    y0.assign(static_cast<std::size_t>(sys.dimension()), 0.0);
    for (int p = 0; p < sys.populations(); ++p) y0[static_cast<std::size_t>(p)] = 0.5;
  }
  ScenarioSettings s = spec.scenario;
  s.record = true;
  s.recon_T = 0.0;
  try {
    const ScenarioOutcome out = run_scenario(sys, y0, s);
    row.terminal_state = out.y_final;
    if (out.winner != Winner::stalemate) {
      row.attractor = AttractorClass::extinction;
    } else {
      const double t_end = s.integrator.t_end;
      const int samples = 2000;
      std::vector<double> tail(samples);
      for (int k = 0; k < samples; ++k)
        tail[static_cast<std::size_t>(k)] = out.trajectory.at(0.75 * t_end + 0.25 * t_end * k / (samples - 1))[1];
      row.attractor = classify_tail(tail);
    }
  } catch (const NumericalError& e) {
    row.fixed_points.diagnostics.push_back(std::string("trajectory failed: ") + e.what());
  }
  return row;
}

void check_sweep(Variant v, const SweepSpec& spec) {
  if (!is_reduced(v) || v == Variant::eco3_reduced)
    throw ValidationError("sweep: two-population reduced variant required");
  if (!is_model_param(spec.param)) throw ValidationError("sweep: unknown parameter '" + spec.param + "'");
  if (spec.n_points < 1) throw ValidationError("sweep: n_points must be >= 1");
  if (!spec.start.empty() && spec.start.size() != 3) throw ValidationError("sweep: start state needs 3 entries");
}

}  // namespace

std::vector<SweepRow> sweep_bifurcation(Variant v, const ModelConfig& cfg, const SweepSpec& spec, Parallelism par) {
  check_sweep(v, spec);
  std::vector<SweepRow> rows(static_cast<std::size_t>(spec.n_points));
  std::vector<std::exception_ptr> errors(rows.size());
#pragma omp parallel for schedule(dynamic) num_threads(resolve_jobs(par))
  for (int i = 0; i < spec.n_points; ++i) {
    try {
      rows[static_cast<std::size_t>(i)] = sweep_point(v, cfg, spec, i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  // Same exception as the serial twin would raise first.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::vector<SweepRow> sweep_bifurcation_serial(Variant v, const ModelConfig& cfg, const SweepSpec& spec) {
  check_sweep(v, spec);
  std::vector<SweepRow> rows;
  for (int i = 0; i < spec.n_points; ++i) rows.push_back(sweep_point(v, cfg, spec, i));
  return rows;
}

}  // namespace compdyn
