#include "compdyn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "compdyn/errors.hpp"

namespace compdyn {

Eigen::MatrixXd fd_jacobian(const VectorField& f, std::span<const double> x, double rel_step) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd jac(n, n);
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> fp(x.size()), fm(x.size());

  auto central = [&](std::size_t j, double h, Eigen::VectorXd& out) {
    xp[j] = x[j] + h;
    f(xp, fp);
    xp[j] = x[j] - h;
    f(xp, fm);
    xp[j] = x[j];
    for (Eigen::Index i = 0; i < n; ++i)
      out(i) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
  };

  Eigen::VectorXd d1(n), d2(n);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    central(j, h, d1);
    central(j, 0.5 * h, d2);
    jac.col(static_cast<Eigen::Index>(j)) = (4.0 * d2 - d1) / 3.0;
  }
  return jac;
}

Eigen::MatrixXd hessenberg(const Eigen::MatrixXd& input) {
  Eigen::MatrixXd a = input;
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    Eigen::VectorXd v = a.block(k + 1, k, n - k - 1, 1);
    const double alpha = v.norm();
    if (alpha == 0.0) continue;
    v(0) += v(0) >= 0.0 ? alpha : -alpha;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    // A <- (I - 2vv^T) A (I - 2vv^T) on the trailing block.
    auto rows = a.block(k + 1, 0, n - k - 1, n);
    rows -= 2.0 * v * (v.transpose() * rows);
    auto cols = a.block(0, k + 1, n, n - k - 1);
    cols -= 2.0 * (cols * v) * v.transpose();
    for (Eigen::Index i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
  return a;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& input) {
  if (input.rows() != input.cols()) throw ValidationError("eigenvalues: square matrix required");
  const int n = static_cast<int>(input.rows());
  std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
  if (n == 0) return w;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!std::isfinite(input(i, j))) throw NumericalError("eigenvalues: non-finite matrix entry");

  Eigen::MatrixXd a = hessenberg(input);
  const double eps = std::numeric_limits<double>::epsilon();
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

  const long max_sweeps = 100L * n * n;
  long sweeps = 0;
  int nn = n - 1;
  int its = 0;
  double t = 0.0;  // accumulated exceptional shift
  double x = 0, y = 0, z = 0, w2 = 0, p = 0, q = 0, r = 0, s = 0;

  while (nn >= 0) {
    int l = nn;
    for (; l > 0; --l) {
      s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
      if (s == 0.0) s = anorm;
      if (std::abs(a(l, l - 1)) <= eps * s) {
        a(l, l - 1) = 0.0;
        break;
      }
    }
    x = a(nn, nn);
    if (l == nn) {  // one root deflated
      w[static_cast<std::size_t>(nn)] = x + t;
      --nn;
      its = 0;
      continue;
    }
    y = a(nn - 1, nn - 1);
    w2 = a(nn, nn - 1) * a(nn - 1, nn);
    if (l == nn - 1) {  // 2x2 block deflated
      p = 0.5 * (y - x);
      q = p * p + w2;
      z = std::sqrt(std::abs(q));
      x += t;
      if (q >= 0.0) {
        z = p + std::copysign(z, p);
        w[static_cast<std::size_t>(nn - 1)] = w[static_cast<std::size_t>(nn)] = x + z;
        if (z != 0.0) w[static_cast<std::size_t>(nn)] = x - w2 / z;
      } else {
        w[static_cast<std::size_t>(nn)] = {x + p, -z};
        w[static_cast<std::size_t>(nn - 1)] = {x + p, z};
      }
      nn -= 2;
      its = 0;
      continue;
    }

    if (++sweeps > max_sweeps) throw NumericalError("eigenvalues: QR iteration did not converge");
    if (its > 0 && its % 10 == 0) {  // exceptional shift
      t += x;
      for (int i = 0; i <= nn; ++i) a(i, i) -= x;
      s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
      y = x = 0.75 * s;
      w2 = -0.4375 * s * s;
    }
    ++its;

    int m = nn - 2;
    for (; m >= l; --m) {
      z = a(m, m);
      r = x - z;
      s = y - z;
      p = (r * s - w2) / a(m + 1, m) + a(m, m + 1);
      q = a(m + 1, m + 1) - z - r - s;
      r = a(m + 2, m + 1);
      s = std::abs(p) + std::abs(q) + std::abs(r);
      p /= s;
      q /= s;
      r /= s;
      if (m == l) break;
      const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
      const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
      if (u <= eps * v) break;
    }
    for (int i = m; i < nn - 1; ++i) {
      a(i + 2, i) = 0.0;
      if (i != m) a(i + 2, i - 1) = 0.0;
    }
    for (int k = m; k < nn; ++k) {
      if (k != m) {
        p = a(k, k - 1);
        q = a(k + 1, k - 1);
        r = k + 1 != nn ? a(k + 2, k - 1) : 0.0;
        x = std::abs(p) + std::abs(q) + std::abs(r);
        if (x != 0.0) {
          p /= x;
          q /= x;
          r /= x;
        }
      }
      s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
      if (s == 0.0) continue;
      if (k == m) {
        if (l != m) a(k, k - 1) = -a(k, k - 1);
      } else {
        a(k, k - 1) = -s * x;
      }
      p += s;
      x = p / s;
      y = q / s;
      z = r / s;
      q /= p;
      r /= p;
      for (int j = k; j <= nn; ++j) {
        p = a(k, j) + q * a(k + 1, j);
        if (k + 1 != nn) {
          p += r * a(k + 2, j);
          a(k + 2, j) -= p * z;
        }
        a(k + 1, j) -= p * y;
        a(k, j) -= p * x;
      }
      const int mmin = nn < k + 3 ? nn : k + 3;
      for (int i = l; i <= mmin; ++i) {
        p = x * a(i, k) + y * a(i, k + 1);
        if (k + 1 != nn) {
          p += z * a(i, k + 2);
          a(i, k + 2) -= p * r;
        }
        a(i, k + 1) -= p * q;
        a(i, k) -= p;
      }
    }
  }

  std::sort(w.begin(), w.end(), [](const auto& lhs, const auto& rhs) {
    if (lhs.real() != rhs.real()) return lhs.real() > rhs.real();
    return lhs.imag() > rhs.imag();
  });
  return w;
}

std::string_view stability_name(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::nonhyperbolic: return "nonhyperbolic";
  }
  return "?";
}

double max_real_part(const std::vector<std::complex<double>>& eig) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& e : eig) m = std::max(m, e.real());
  return m;
}

Stability classify(const std::vector<std::complex<double>>& eig, double tol) {
  const double m = max_real_part(eig);
  if (m > tol) return Stability::unstable;
  if (m < -tol) return Stability::stable;
  return Stability::nonhyperbolic;
}

}  // namespace compdyn
