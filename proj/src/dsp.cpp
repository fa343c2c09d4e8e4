#include "tvsar/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvsar {

double compute_offset(const Vector& nu, const OffsetPolicy& policy) {
  if (policy.kind == OffsetPolicy::Kind::kFixed) return policy.value;
  bool tiny = false;
  for (int t = 0; t < nu.size(); ++t) {
    if (nu[t] * nu[t] < 1e-16) {
      tiny = true;
      break;
    }
  }
  if (!tiny) return 0.0;
  std::vector<double> v(nu.data(), nu.data() + nu.size());
  auto median = [](std::vector<double> x) {
    const size_t n = x.size();
    std::nth_element(x.begin(), x.begin() + n / 2, x.end());
    double m = x[n / 2];
    if (n % 2 == 0) {
      std::nth_element(x.begin(), x.begin() + n / 2 - 1, x.end());
      m = 0.5 * (m + x[n / 2 - 1]);
    }
    return m;
  };
  const double med = median(v);
  for (double& x : v) x = std::abs(x - med);
  const double mad = median(v);
  return std::max(1e-8, 1e-6 * mad);
}

std::vector<int> draw_allocations(const Vector& z, const Vector& h, Rng& rng) {
  const int T = int(z.size());
  if (h.size() != T + 1) {
    throw std::invalid_argument("draw_allocations: length mismatch");
  }
  std::vector<int> alloc(T);
  std::array<double, OmoriMixture::kComponents> logp;
  for (int t = 0; t < T; ++t) {
    double mx = -1e300;
    for (int j = 0; j < OmoriMixture::kComponents; ++j) {
      const double d = z[t] - h[t + 1] - OmoriMixture::means[j];
      logp[j] = std::log(OmoriMixture::weights[j]) -
                0.5 * std::log(OmoriMixture::variances[j]) -
                0.5 * d * d / OmoriMixture::variances[j];
      mx = std::max(mx, logp[j]);
    }
    double total = 0.0;
    for (double& lp : logp) {
      lp = std::exp(lp - mx);
      total += lp;
    }
    double u = rng.uniform() * total;
    int pick = OmoriMixture::kComponents - 1;
    for (int j = 0; j < OmoriMixture::kComponents; ++j) {
      u -= logp[j];
      if (u <= 0.0) {
        pick = j;
        break;
      }
    }
    alloc[t] = pick;
  }
  return alloc;
}

Vector sample_tridiag_gaussian(const Vector& diag, const Vector& offdiag,
                               const Vector& b, Rng& rng) {
  const int n = int(diag.size());
  if (offdiag.size() != n - 1 || b.size() != n) {
    throw std::invalid_argument("sample_tridiag_gaussian: size mismatch");
  }
  // banded Cholesky Omega = L L', L lower bidiagonal
  Vector ld(n), lo(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) {
    double d = diag[i];
    if (i > 0) d -= lo[i - 1] * lo[i - 1];
    if (!(d > 0.0)) {
      throw std::runtime_error(
          "sample_tridiag_gaussian: precision not positive definite");
    }
    ld[i] = std::sqrt(d);
    if (i + 1 < n) lo[i] = offdiag[i] / ld[i];
  }
  // mean = Omega^{-1} b via forward then backward solve
  Vector u(n);
  for (int i = 0; i < n; ++i) {
    double v = b[i];
    if (i > 0) v -= lo[i - 1] * u[i - 1];
    u[i] = v / ld[i];
  }
  Vector mean(n);
  for (int i = n - 1; i >= 0; --i) {
    double v = u[i];
    if (i + 1 < n) v -= lo[i] * mean[i + 1];
    mean[i] = v / ld[i];
  }
  // draw = mean + L^{-T} eps
  Vector w(n);
  for (int i = n - 1; i >= 0; --i) {
    double v = rng.normal();
    if (i + 1 < n) v -= lo[i] * w[i + 1];
    w[i] = v / ld[i];
  }
  return mean + w;
}

Vector draw_h(const Vector& z, const std::vector<int>& alloc, double mu,
              double kappa, const Vector& xi, Rng& rng) {
  const int T = int(z.size());
  if (int(alloc.size()) != T || xi.size() != T + 1) {
    throw std::invalid_argument("draw_h: length mismatch");
  }
  // prior precision of (h - mu 1): AR(1) with per-step precisions xi
  Vector diag(T + 1), off(T), b(T + 1);
  for (int t = 0; t <= T; ++t) {
    diag[t] = xi[t];
    if (t < T) diag[t] += kappa * kappa * xi[t + 1];
  }
  for (int t = 0; t < T; ++t) off[t] = -kappa * xi[t + 1];
  // b = P * (mu 1) for the prior part
  for (int t = 0; t <= T; ++t) {
    b[t] = mu * diag[t];
    if (t > 0) b[t] += mu * off[t - 1];
    if (t < T) b[t] += mu * off[t];
  }
  // likelihood terms z_t ~ N(h_t + m_{a_t}, v^2_{a_t}), t = 1..T
  for (int t = 1; t <= T; ++t) {
    const int j = alloc[t - 1];
    const double prec = 1.0 / OmoriMixture::variances[j];
    diag[t] += prec;
    b[t] += prec * (z[t - 1] - OmoriMixture::means[j]);
  }
  return sample_tridiag_gaussian(diag, off, b, rng);
}

Vector draw_xi(const Vector& h, double mu, double kappa, Rng& rng) {
  const int T = int(h.size()) - 1;
  Vector xi(T + 1);
  xi[0] = sample_polya_gamma(h[0] - mu, rng);
  for (int t = 1; t <= T; ++t) {
    const double eta = (h[t] - mu) - kappa * (h[t - 1] - mu);
    xi[t] = sample_polya_gamma(eta, rng);
  }
  return xi;
}

double draw_mu(const Vector& h, double kappa, const Vector& xi, double mu0,
               double sigma0, Rng& rng) {
  const int T = int(h.size()) - 1;
  // xi~_0 = xi_0, z_0 = h_0; for t >= 1 xi~_t = (1-kappa)^2 xi_t and
  // z_t = (h_t - kappa h_{t-1}) / (1 - kappa); the products below avoid
  // the 0/0 at kappa = 1
  double sum_prec = xi[0];
  double sum_wz = xi[0] * h[0];
  for (int t = 1; t <= T; ++t) {
    sum_prec += (1.0 - kappa) * (1.0 - kappa) * xi[t];
    sum_wz += (1.0 - kappa) * xi[t] * (h[t] - kappa * h[t - 1]);
  }
  const double prec = sum_prec + 1.0 / (sigma0 * sigma0);
  const double mean = (sum_wz + mu0 / (sigma0 * sigma0)) / prec;
  return mean + rng.normal() / std::sqrt(prec);
}

double draw_kappa(const Vector& h, double mu, const Vector& xi, double kappa0,
                  double psi0, Rng& rng) {
  const int T = int(h.size()) - 1;
  double sxx = 0.0, sxy = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double x = h[t - 1] - mu;
    sxx += xi[t] * x * x;
    sxy += xi[t] * x * (h[t] - mu);
  }
  const double prec = sxx + 1.0 / (psi0 * psi0);
  const double mean = (sxy + kappa0 / (psi0 * psi0)) / prec;
  return sample_trunc_normal(mean, 1.0 / std::sqrt(prec), -1.0, 1.0, rng);
}

DspState dsp_block_update(DspState state, const Vector& nu,
                          const OffsetPolicy& policy, const DspPriors& priors,
                          Rng& rng) {
  const int T = int(nu.size());
  const double offset = compute_offset(nu, policy);
  Vector z(T);
  for (int t = 0; t < T; ++t) z[t] = std::log(nu[t] * nu[t] + offset);
  state.alloc = draw_allocations(z, state.h, rng);
  state.h = draw_h(z, state.alloc, state.mu, state.kappa, state.xi, rng);
  state.xi = draw_xi(state.h, state.mu, state.kappa, rng);
  state.mu = draw_mu(state.h, state.kappa, state.xi, priors.mu0, priors.sigma0,
                     rng);
  state.kappa = draw_kappa(state.h, state.mu, state.xi, priors.kappa0,
                           priors.psi0, rng);
  return state;
}

}  // namespace tvsar
