#pragma once

#include <vector>

#include "tvsar/distributions.hpp"
#include "tvsar/rng.hpp"
#include "tvsar/stability.hpp"

namespace tvsar {

// Dynamic shrinkage state for one coefficient: log-volatility path
// h_{0:T}, Polya-Gamma variables xi_{0:T}, mixture allocations a_{1:T}
// and the global (mu, kappa) pair.
struct DspState {
  Vector h;                 // length T+1
  Vector xi;                // length T+1, strictly positive
  std::vector<int> alloc;   // length T, values 0..9
  double mu = 0.0;
  double kappa = 0.0;
};

struct OffsetPolicy {
  enum class Kind { kFixed, kDspRule };
  Kind kind = Kind::kFixed;
  double value = 1e-16;
};

struct DspPriors {
  double mu0 = -15.0;
  double sigma0 = 3.0;
  double kappa0 = 0.5;
  double psi0 = 0.3;
};

// Offset added to nu_t^2 before taking logs. The dsp rule returns
// max(1e-8, 1e-6 * mad(nu)) when any nu_t^2 < 1e-16 and 0 otherwise.
double compute_offset(const Vector& nu, const OffsetPolicy& policy);

// Samples mixture allocations a_t with probability proportional to
// q_j N(z_t | h_t + m_j, v_j^2), t = 1..T.
std::vector<int> draw_allocations(const Vector& z, const Vector& h, Rng& rng);

// Exact draw of h_{0:T} from its Gaussian full conditional; tridiagonal
// precision factorized by banded Cholesky.
Vector draw_h(const Vector& z, const std::vector<int>& alloc, double mu,
              double kappa, const Vector& xi, Rng& rng);

// xi_t ~ PG(1, eta_t) with eta_t the AR(1) residual of h.
Vector draw_xi(const Vector& h, double mu, double kappa, Rng& rng);

// Gaussian full-conditional draw of the global mean log-volatility.
double draw_mu(const Vector& h, double kappa, const Vector& xi, double mu0,
               double sigma0, Rng& rng);

// Truncated-normal full-conditional draw of the persistence.
double draw_kappa(const Vector& h, double mu, const Vector& xi, double kappa0,
                  double psi0, Rng& rng);

// One full DSP Gibbs block for a coefficient with increments nu (length
// T): allocations, h, xi, mu, kappa in that order.
DspState dsp_block_update(DspState state, const Vector& nu,
                          const OffsetPolicy& policy, const DspPriors& priors,
                          Rng& rng);

// Draw from N(Omega^{-1} b, Omega^{-1}) for a symmetric tridiagonal
// positive definite Omega given by its diagonal and (upper) off-diagonal.
// Shared by the h update and the stochastic-volatility update.
Vector sample_tridiag_gaussian(const Vector& diag, const Vector& offdiag,
                               const Vector& b, Rng& rng);

}  // namespace tvsar
