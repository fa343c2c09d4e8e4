#include "tvsar/stability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace tvsar {

namespace {

void require_finite(const Vector& v, const char* what) {
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

}  // namespace

Vector theta_to_pacf(const Vector& theta) {
  require_finite(theta, "theta_to_pacf");
  Vector r(theta.size());
  detail::theta_to_pacf_impl(theta.data(), r.data(), int(theta.size()));
  // huge |theta| rounds to |r| = 1 in double; keep the open interval
  const double bound = std::nextafter(1.0, 0.0);
  for (int k = 0; k < r.size(); ++k) r[k] = std::clamp(r[k], -bound, bound);
  return r;
}

Vector pacf_to_phi(const Vector& r) {
  require_finite(r, "pacf_to_phi");
  for (int k = 0; k < r.size(); ++k) {
    if (std::abs(r[k]) >= 1.0) {
      throw std::invalid_argument("pacf_to_phi: |r_k| >= 1");
    }
  }
  Vector phi(r.size());
  if (r.size() > 0) {
    detail::pacf_to_phi_impl(r.data(), phi.data(), int(r.size()));
  }
  return phi;
}

Vector phi_to_pacf(const Vector& phi) {
  require_finite(phi, "phi_to_pacf");
  const int p = int(phi.size());
  Vector r(p);
  std::vector<double> cur(phi.data(), phi.data() + p);
  for (int k = p - 1; k >= 0; --k) {
    const double rk = cur[k];
    if (!(std::abs(rk) < 1.0)) {
      throw std::domain_error("phi_to_pacf: input not stable");
    }
    r[k] = rk;
    std::vector<double> prev(k);
    const double denom = 1.0 - rk * rk;
    for (int j = 0; j < k; ++j) {
      prev[j] = (cur[j] + rk * cur[k - 1 - j]) / denom;
    }
    cur = std::move(prev);
  }
  return r;
}

Vector phi_to_theta(const Vector& phi) {
  Vector r = phi_to_pacf(phi);
  Vector theta(r.size());
  for (int k = 0; k < r.size(); ++k) {
    theta[k] = r[k] / std::sqrt(1.0 - r[k] * r[k]);
  }
  return theta;
}

Matrix stability_jacobian(const Vector& theta) {
  require_finite(theta, "stability_jacobian");
  const int p = int(theta.size());
  Matrix jac(p, p);
  std::vector<Dual> th(p), r(p), phi(p);
  for (int col = 0; col < p; ++col) {
    for (int i = 0; i < p; ++i) th[i] = Dual(theta[i], i == col ? 1.0 : 0.0);
    detail::theta_to_pacf_impl(th.data(), r.data(), p);
    detail::pacf_to_phi_impl(r.data(), phi.data(), p);
    for (int i = 0; i < p; ++i) jac(i, col) = phi[i].d;
  }
  return jac;
}

Vector sample_uniform_stable_theta(int p, Rng& rng) {
  if (p < 1) throw std::invalid_argument("sample_uniform_stable_theta: p < 1");
  Vector theta(p);
  for (int k = 1; k <= p; ++k) {
    const double scale = 1.0 / std::sqrt(double(k + 1));
    if (k % 2 == 1) {
      // t(k+1) via normal / sqrt(chi2/dof)
      const double nu = double(k + 1);
      const double z = rng.normal();
      const double w = rng.chi2(nu);
      theta[k - 1] = scale * z / std::sqrt(w / nu);
    } else {
      // skew-t(k/2, (k+2)/2) via its Beta characterization
      const double a = 0.5 * k;
      const double b = 0.5 * (k + 2);
      const double y = rng.beta(a, b);
      const double x =
          std::sqrt(a + b) * (2.0 * y - 1.0) / (2.0 * std::sqrt(y * (1.0 - y)));
      theta[k - 1] = scale * x;
    }
  }
  return theta;
}

namespace {

// skew-t(a, b) log density (unit scale), reducing to t(2a) when a == b.
double skew_t_logpdf(double x, double a, double b) {
  const double s = x / std::sqrt(a + b + x * x);
  return -(a + b - 1.0) * std::log(2.0) - std::lgamma(a) - std::lgamma(b) +
         std::lgamma(a + b) - 0.5 * std::log(a + b) +
         (a + 0.5) * std::log1p(s) + (b + 0.5) * std::log1p(-s);
}

double lag_prior_logpdf(double theta_k, int k) {
  const double scale = 1.0 / std::sqrt(double(k + 1));
  const double x = theta_k / scale;
  double a, b;
  if (k % 2 == 1) {
    a = b = 0.5 * (k + 1);
  } else {
    a = 0.5 * k;
    b = 0.5 * (k + 2);
  }
  return skew_t_logpdf(x, a, b) - std::log(scale);
}

}  // namespace

double uniform_stable_theta_logpdf(const Vector& theta) {
  double lp = 0.0;
  for (int k = 0; k < theta.size(); ++k) {
    lp += lag_prior_logpdf(theta[k], k + 1);
  }
  return lp;
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

// Squared Hellinger distance between the lag-k prior and N(m, s^2),
// 1 - integral sqrt(p q), by 256-node Gauss-Legendre on [-20 sigma, 20 sigma].
double hellinger_sq(int k, double m, double s, const std::vector<double>& gx,
                    const std::vector<double>& gw) {
  const double scale = 1.0 / std::sqrt(double(k + 1));
  const double half = 20.0 * std::max(scale, s);
  double acc = 0.0;
  for (size_t i = 0; i < gx.size(); ++i) {
    const double x = half * gx[i];
    const double lp = lag_prior_logpdf(x, k);
    const double z = (x - m) / s;
    const double lq = -0.5 * z * z - 0.5 * std::log(2.0 * M_PI) - std::log(s);
    acc += half * gw[i] * std::exp(0.5 * (lp + lq));
  }
  return 1.0 - acc;
}

}  // namespace

std::pair<double, double> hellinger_closest_normal(int k) {
  std::vector<double> gx, gw;
  gauss_legendre(256, gx, gw);
  const double scale = 1.0 / std::sqrt(double(k + 1));
  double m = (k % 2 == 1) ? 0.0 : -0.4 * scale * std::sqrt(2.0);
  double s = 1.2 * scale;
  // coordinate descent with golden-section line searches
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  auto minimize1d = [&](auto f, double lo, double hi) {
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-10) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = f(d);
      }
    }
    return 0.5 * (a + b);
  };
  double prev = 1e300;
  for (int sweep = 0; sweep < 60; ++sweep) {
    s = minimize1d([&](double sv) { return hellinger_sq(k, m, sv, gx, gw); },
                   1e-4, 5.0);
    if (k % 2 == 0) {
      m = minimize1d([&](double mv) { return hellinger_sq(k, mv, s, gx, gw); },
                     -3.0, 3.0);
    }
    const double cur = hellinger_sq(k, m, s, gx, gw);
    if (std::abs(prev - cur) < 1e-8) break;
    prev = cur;
  }
  return {m, s};
}

GaussianPrior normal_approx_prior(int p) {
  if (p < 1) throw std::invalid_argument("normal_approx_prior: p < 1");
  // Hellinger-optimal normal approximations for lags 1..10.
  static constexpr std::array<double, 10> kMeans = {
      0.0, -0.53, 0.0, -0.264, 0.0, -0.175, 0.0, -0.13, 0.0, -0.103};
  static constexpr std::array<double, 10> kStdevs = {
      1.042, 0.858, 0.622, 0.558, 0.475, 0.441, 0.397, 0.375, 0.348, 0.332};
  GaussianPrior prior;
  prior.means.resize(p);
  prior.stdevs.resize(p);
  for (int k = 1; k <= p; ++k) {
    if (k <= 10) {
      prior.means[k - 1] = kMeans[k - 1];
      prior.stdevs[k - 1] = kStdevs[k - 1];
    } else {
      auto [m, s] = hellinger_closest_normal(k);
      prior.means[k - 1] = m;
      prior.stdevs[k - 1] = s;
    }
  }
  return prior;
}

Eigen::VectorXcd companion_eigenvalues(const Vector& phi) {
  const int p = int(phi.size());
  if (p < 1) throw std::invalid_argument("companion_eigenvalues: empty phi");
  Matrix companion = Matrix::Zero(p, p);
  companion.row(0) = phi.transpose();
  for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Matrix> solver(companion, /*computeEigenvectors=*/false);
  return solver.eigenvalues();
}

bool is_stable(const Vector& phi) {
  if (phi.size() == 0) return true;
  const auto eig = companion_eigenvalues(phi);
  for (int i = 0; i < eig.size(); ++i) {
    if (std::abs(eig[i]) >= 1.0) return false;
  }
  return true;
}

}  // namespace tvsar
