#include "tvsar/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace tvsar {

SarStructure::SarStructure(std::vector<int> seasons, std::vector<int> orders)
    : seasons_(std::move(seasons)), orders_(std::move(orders)) {
  if (seasons_.size() != orders_.size() || seasons_.empty()) {
    throw std::invalid_argument("SarStructure: seasons/orders length mismatch");
  }
  for (size_t j = 0; j < seasons_.size(); ++j) {
    if (seasons_[j] < 1) throw std::invalid_argument("SarStructure: season < 1");
    if (orders_[j] < 0) throw std::invalid_argument("SarStructure: order < 0");
  }
  block_offsets_.resize(seasons_.size());
  for (size_t j = 0; j < seasons_.size(); ++j) {
    block_offsets_[j] = total_order_;
    total_order_ += orders_[j];
    p_max_ += orders_[j] * seasons_[j];
  }
  // structural support of the multiplied-out polynomial
  std::vector<char> support(p_max_ + 1, 0);
  support[0] = 1;
  int used = 0;
  for (size_t j = 0; j < seasons_.size(); ++j) {
    std::vector<char> next(p_max_ + 1, 0);
    for (int d = 0; d <= used; ++d) {
      if (!support[d]) continue;
      next[d] = 1;
      for (int i = 1; i <= orders_[j]; ++i) next[d + i * seasons_[j]] = 1;
    }
    used += orders_[j] * seasons_[j];
    support = next;
  }
  for (int d = 1; d <= p_max_; ++d) {
    if (support[d]) lags_.push_back(d);
  }
}

ExpandedRegression expand_stable(const SarStructure& st, const Vector& phi) {
  if (phi.size() != st.total_order()) {
    throw std::invalid_argument("expand_stable: wrong phi length");
  }
  std::vector<double> dense;
  detail::multiply_polynomials(st, phi.data(), dense);
  ExpandedRegression reg;
  reg.lags = st.lags();
  reg.coeffs.resize(int(reg.lags.size()));
  for (size_t i = 0; i < reg.lags.size(); ++i) {
    reg.coeffs[int(i)] = -dense[reg.lags[i]];
  }
  return reg;
}

ExpandedRegression expand_coeffs(const SarStructure& st, const Vector& theta) {
  if (theta.size() != st.total_order()) {
    throw std::invalid_argument("expand_coeffs: wrong theta length");
  }
  for (int i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta[i])) {
      throw std::invalid_argument("expand_coeffs: non-finite theta");
    }
  }
  ExpandedRegression reg;
  reg.lags = st.lags();
  reg.coeffs.resize(int(reg.lags.size()));
  detail::expand_from_theta(st, theta.data(), reg.coeffs.data());
  return reg;
}

Matrix expand_jacobian(const SarStructure& st, const Vector& theta) {
  const int r = st.total_order();
  const int n = int(st.lags().size());
  Matrix jac(n, r);
  std::vector<Dual> th(r), out(n);
  for (int col = 0; col < r; ++col) {
    for (int i = 0; i < r; ++i) th[i] = Dual(theta[i], i == col ? 1.0 : 0.0);
    detail::expand_from_theta(st, th.data(), out.data());
    for (int i = 0; i < n; ++i) jac(i, col) = out[i].d;
  }
  return jac;
}

Vector design_vector(const Vector& y, const std::vector<int>& lags, int t) {
  Vector x(int(lags.size()));
  for (size_t i = 0; i < lags.size(); ++i) {
    const int idx = t - lags[i];  // 1-based time of the lagged value
    if (idx < 1 || t > int(y.size())) {
      throw std::invalid_argument("design_vector: insufficient history");
    }
    x[int(i)] = y[idx - 1];
  }
  return x;
}

Vector simulate_tvsar(const ParamPaths& paths, const NoiseState& noise,
                      int warmup, Rng& rng) {
  const SarStructure& st = paths.structure;
  const int T = int(paths.theta.rows()) - 1;
  const int r = st.total_order();
  if (paths.theta.cols() != r) {
    throw std::invalid_argument("simulate_tvsar: wrong theta width");
  }
  // stability holds by construction of the theta parameterization, but the
  // contract promises a check on the mapped per-block coefficients
  for (int t = 0; t <= T; ++t) {
    for (int j = 0; j < st.components(); ++j) {
      const int off = st.block_offset(j);
      const int p = st.orders()[j];
      if (p == 0) continue;
      const Vector phi =
          pacf_to_phi(theta_to_pacf(paths.theta.row(t).segment(off, p).transpose()));
      if (!is_stable(phi)) {
        throw std::domain_error("simulate_tvsar: non-stable path");
      }
    }
  }
  const int pmax = st.p_max();
  std::vector<double> hist(pmax, 0.0);  // hist[0] most recent
  auto step = [&](const ExpandedRegression& reg, double sigma) {
    double mean = 0.0;
    for (size_t i = 0; i < reg.lags.size(); ++i) {
      mean += reg.coeffs[int(i)] * hist[reg.lags[i] - 1];
    }
    const double ynew = mean + sigma * rng.normal();
    if (pmax > 0) {
      hist.insert(hist.begin(), ynew);
      hist.pop_back();
    }
    return ynew;
  };
  const double sigma0 =
      noise.mode == NoiseState::Mode::kStatic ? noise.sigma : noise.sigma_at(1);
  const ExpandedRegression reg0 = expand_coeffs(st, paths.theta.row(0).transpose());
  for (int i = 0; i < warmup; ++i) step(reg0, sigma0);
  Vector y(T);
  for (int t = 1; t <= T; ++t) {
    const ExpandedRegression reg = expand_coeffs(st, paths.theta.row(t).transpose());
    y[t - 1] = step(reg, noise.sigma_at(t));
  }
  return y;
}

double conditional_loglik(const Vector& y, const ParamPaths& paths,
                          const NoiseState& noise) {
  const SarStructure& st = paths.structure;
  const int T = int(y.size());
  const int pmax = st.p_max();
  if (T <= pmax) throw std::invalid_argument("conditional_loglik: T <= p_max");
  double ll = 0.0;
  for (int t = pmax + 1; t <= T; ++t) {
    const double sigma = noise.sigma_at(t);
    if (!(sigma > 0.0)) {
      throw std::invalid_argument("conditional_loglik: sigma_t <= 0");
    }
    const ExpandedRegression reg = expand_coeffs(st, paths.theta.row(t).transpose());
    const Vector x = design_vector(y, reg.lags, t);
    const double resid = y[t - 1] - x.dot(reg.coeffs);
    ll += -0.5 * std::log(2.0 * M_PI) - std::log(sigma) -
          0.5 * resid * resid / (sigma * sigma);
  }
  return ll;
}

Vector spectral_density(const SarStructure& st, const Vector& theta_t,
                        double sigma_t, const Vector& omegas) {
  for (int i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] > 0.0 && omegas[i] <= M_PI)) {
      throw std::invalid_argument("spectral_density: omega outside (0, pi]");
    }
  }
  // per-block stable coefficients
  const int r = st.total_order();
  std::vector<double> phi(r);
  for (int j = 0; j < st.components(); ++j) {
    const int off = st.block_offset(j);
    const int p = st.orders()[j];
    if (p == 0) continue;
    const Vector blk =
        pacf_to_phi(theta_to_pacf(theta_t.segment(off, p)));
    for (int i = 0; i < p; ++i) phi[off + i] = blk[i];
  }
  Vector f(omegas.size());
  for (int w = 0; w < omegas.size(); ++w) {
    double denom = 1.0;
    for (int j = 0; j < st.components(); ++j) {
      const int off = st.block_offset(j);
      const int p = st.orders()[j];
      std::complex<double> poly(1.0, 0.0);
      for (int i = 1; i <= p; ++i) {
        const double ang = -double(i) * st.seasons()[j] * omegas[w];
        poly -= phi[off + i - 1] * std::complex<double>(std::cos(ang),
                                                        std::sin(ang));
      }
      denom *= std::norm(poly);
    }
    f[w] = sigma_t * sigma_t / (M_PI * denom);
  }
  return f;
}

}  // namespace tvsar
