#include "tvsar/distributions.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tvsar {

const std::array<double, 10> OmoriMixture::weights = {
    0.00609, 0.04775, 0.13057, 0.20674, 0.22715,
    0.18842, 0.12047, 0.05591, 0.01575, 0.00115};
const std::array<double, 10> OmoriMixture::means = {
    1.92677, 1.34744, 0.73504, 0.02266, -0.85173,
    -1.97278, -3.46788, -5.55246, -8.68384, -14.65000};
const std::array<double, 10> OmoriMixture::variances = {
    0.11265, 0.17788, 0.26768, 0.40611, 0.62699,
    0.98583, 1.57469, 2.54498, 4.16591, 7.33342};

namespace {

constexpr double kTrunc = 0.64;  // Devroye's series crossover point

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// CDF of inverse Gaussian(mu, lambda=1) at x; mu = infinity handled as the
// Levy limit.
double pigauss(double x, double z) {
  if (x <= 0.0) return 0.0;
  const double rx = 1.0 / std::sqrt(x);
  if (z < 1e-12) return 2.0 * norm_cdf(-rx);
  return norm_cdf(rx * (x * z - 1.0)) +
         std::exp(2.0 * z) * norm_cdf(-rx * (x * z + 1.0));
}

// Inverse Gaussian(mu=1/z, lambda=1) truncated to (0, t), t = kTrunc.
double rtigauss(double z, Rng& rng) {
  const double t = kTrunc;
  double x = t + 1.0;
  if (1.0 / z > t) {
    // rejection from the truncated Levy proposal
    for (;;) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  const double mu = 1.0 / z;
  while (x > t) {
    // Michael-Schucany-Haas
    const double y = rng.normal();
    const double y2 = y * y;
    x = mu + 0.5 * mu * mu * y2 -
        0.5 * mu * std::sqrt(4.0 * mu * y2 + mu * mu * y2 * y2);
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
  }
  return x;
}

// Piecewise coefficients a_n(x) of the Jacobi density series.
double series_coef(int n, double x) {
  const double k = n + 0.5;
  if (x > kTrunc) {
    return M_PI * k * std::exp(-0.5 * k * k * M_PI * M_PI * x);
  }
  return M_PI * k * std::pow(2.0 / (M_PI * x), 1.5) *
         std::exp(-2.0 * k * k / x);
}

}  // namespace

double sample_polya_gamma(double c, Rng& rng) {
  if (!std::isfinite(c)) {
    throw std::invalid_argument("sample_polya_gamma: non-finite c");
  }
  const double z = 0.5 * std::abs(c);
  const double fz = 0.125 * M_PI * M_PI + 0.5 * z * z;
  const double p = 0.5 * M_PI / fz * std::exp(-fz * kTrunc);
  const double q = 2.0 * std::exp(-z) * pigauss(kTrunc, z);
  for (;;) {
    double x;
    if (rng.uniform() < p / (p + q)) {
      x = kTrunc + rng.exponential() / fz;
    } else {
      x = rtigauss(z, rng);
    }
    // alternating series accept/reject on J*(1, z)
    double s = series_coef(0, x);
    const double y = rng.uniform() * s;
    int n = 0;
    for (;;) {
      ++n;
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

double sample_z(double a, double b, double mu, double sigma, Rng& rng) {
  if (a <= 0.0 || b <= 0.0 || sigma <= 0.0) {
    throw std::invalid_argument("sample_z: a, b, sigma must be positive");
  }
  const double beta = rng.beta(a, b);
  return mu + sigma * (std::log(beta) - std::log1p(-beta));
}

double sample_skew_t(double a, double b, double mu, double sigma, Rng& rng) {
  if (a <= 0.0 || b <= 0.0 || sigma <= 0.0) {
    throw std::invalid_argument("sample_skew_t: a, b, sigma must be positive");
  }
  const double y = rng.beta(a, b);
  const double x =
      std::sqrt(a + b) * (2.0 * y - 1.0) / (2.0 * std::sqrt(y * (1.0 - y)));
  return mu + sigma * x;
}

double sample_trunc_normal(double mean, double sd, double lo, double hi,
                           Rng& rng) {
  if (sd <= 0.0) throw std::invalid_argument("sample_trunc_normal: sd <= 0");
  if (!(lo < hi)) throw std::invalid_argument("sample_trunc_normal: lo >= hi");
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  // plain rejection when the untruncated mass in (a, b) is not tiny
  const double mass = norm_cdf(b) - norm_cdf(a);
  if (mass > 1e-4) {
    for (;;) {
      const double z = rng.normal();
      if (z > a && z < b) return mean + sd * z;
    }
  }
  // one-sided exponential rejection in the dominant tail (Robert 1995),
  // mirrored for a left tail
  const bool flip = b <= 0.0;
  const double al = flip ? -b : a;
  const double bu = flip ? -a : b;
  const double rate = 0.5 * (al + std::sqrt(al * al + 4.0));
  for (;;) {
    const double z = al + rng.exponential() / rate;
    if (z > bu) continue;
    const double rho = std::exp(-0.5 * (z - rate) * (z - rate));
    if (rng.uniform() <= rho) return mean + sd * (flip ? -z : z);
  }
}

double sample_scaled_inv_chi2(double v, double s2, Rng& rng) {
  if (v <= 0.0 || s2 <= 0.0) {
    throw std::invalid_argument("sample_scaled_inv_chi2: v, s2 must be > 0");
  }
  return v * s2 / rng.chi2(v);
}

std::vector<int> systematic_resample(const std::vector<double>& weights, int n,
                                     Rng& rng) {
  if (n < 1) throw std::invalid_argument("systematic_resample: n < 1");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) {
      throw std::invalid_argument("systematic_resample: negative weight");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-8) {
    throw std::invalid_argument("systematic_resample: weights must sum to 1");
  }
  std::vector<int> idx(n);
  const double u0 = rng.uniform() / n;
  double cum = weights[0];
  int j = 0;
  for (int i = 0; i < n; ++i) {
    const double u = u0 + double(i) / n;
    while (cum < u && j + 1 < int(weights.size())) {
      ++j;
      cum += weights[j];
    }
    idx[i] = j;
  }
  return idx;
}

double ess(const std::vector<double>& weights) {
  double s2 = 0.0;
  for (double w : weights) s2 += w * w;
  return 1.0 / s2;
}

}  // namespace tvsar
