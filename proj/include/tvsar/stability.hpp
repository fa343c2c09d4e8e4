#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "tvsar/dual.hpp"
#include "tvsar/rng.hpp"

namespace tvsar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Independent Gaussian approximation of the uniform-over-stability prior,
// one (mean, stdev) pair per lag.
struct GaussianPrior {
  Vector means;
  Vector stdevs;
};

namespace detail {

// theta -> pacf, elementwise r = theta / sqrt(1 + theta^2).
template <class T>
void theta_to_pacf_impl(const T* theta, T* r, int p) {
  for (int k = 0; k < p; ++k) {
    r[k] = theta[k] / sqrt(T(1.0) + theta[k] * theta[k]);
  }
}

// Levinson-Durbin style level recursion from partial autocorrelations to
// AR coefficients of 1 - phi_1 L - ... - phi_p L^p.
//
// Note: the recursion uses the classical "-" sign, which is the convention
// whose range is exactly the stability region of this polynomial.
template <class T>
void pacf_to_phi_impl(const T* r, T* phi, int p) {
  std::vector<T> work(p);
  phi[0] = r[0];
  for (int k = 1; k < p; ++k) {
    for (int j = 0; j < k; ++j) {
      work[j] = phi[j] - r[k] * phi[k - 1 - j];
    }
    for (int j = 0; j < k; ++j) phi[j] = work[j];
    phi[k] = r[k];
  }
}

}  // namespace detail

// Monahan-style transformation of unrestricted coefficients to partial
// autocorrelations in (-1, 1). Throws std::invalid_argument on non-finite
// input.
Vector theta_to_pacf(const Vector& theta);

// Maps partial autocorrelations to stable AR coefficients. Throws
// std::invalid_argument unless every |r_k| < 1.
Vector pacf_to_phi(const Vector& r);

// Inverse of pacf_to_phi. Throws std::domain_error if the downward
// recursion leaves (-1, 1), i.e. the input is not stable.
Vector phi_to_pacf(const Vector& phi);

// Exact inverse of the composite map; pacf_to_phi(theta_to_pacf(.))
// round-trips within 1e-10.
Vector phi_to_theta(const Vector& phi);

// Jacobian d phi / d theta of the composite map, by forward-mode dual
// propagation through the recursion.
Matrix stability_jacobian(const Vector& theta);

// Draws theta so that the implied phi is uniform over the stability
// region: t(k+1, 0, 1/sqrt(k+1)) for odd k, skew-t(k/2, (k+2)/2, 0,
// 1/sqrt(k+1)) for even k.
Vector sample_uniform_stable_theta(int p, Rng& rng);

// Log density of the uniform-over-stability prior in theta coordinates.
double uniform_stable_theta_logpdf(const Vector& theta);

// Closest independent normal approximation (Hellinger distance) of the
// uniform-over-stability prior; tabulated for k <= 10, minimized
// numerically beyond.
GaussianPrior normal_approx_prior(int p);

// Numerical Hellinger minimizer for lag k, independent of the table.
// Returns (mean, stdev).
std::pair<double, double> hellinger_closest_normal(int k);

// Eigenvalues of the companion matrix of 1 - phi_1 L - ... - phi_p L^p.
Eigen::VectorXcd companion_eigenvalues(const Vector& phi);

// True iff all companion eigenvalue moduli are < 1.
bool is_stable(const Vector& phi);

}  // namespace tvsar
