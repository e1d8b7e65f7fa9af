#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace compdyn {

using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

/// Central-difference Jacobian with one Richardson extrapolation step. The
/// base step for column j is h_j = rel_step * max(1, |x_j|).
Eigen::MatrixXd fd_jacobian(const VectorField& f, std::span<const double> x, double rel_step = 1e-6);

// Reduce to upper Hessenberg form by Householder reflections (similarity).
Eigen::MatrixXd hessenberg(const Eigen::MatrixXd& a);

/// Eigenvalues of a real square matrix: Hessenberg reduction followed by
/// Francis double-shift QR. Throws NumericalError after 100 n^2 sweeps
/// without convergence. Sorted by descending real part, then imaginary part.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& a);

enum class Stability { stable, unstable, nonhyperbolic };

std::string_view stability_name(Stability s);

double max_real_part(const std::vector<std::complex<double>>& eig);

// stable: every real part < -tol; unstable: some real part > tol;
// nonhyperbolic otherwise.
Stability classify(const std::vector<std::complex<double>>& eig, double tol = 1e-10);

}  // namespace compdyn
