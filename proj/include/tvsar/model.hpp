#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tvsar/dual.hpp"
#include "tvsar/rng.hpp"
#include "tvsar/stability.hpp"

namespace tvsar {

// Multi-seasonal AR structure: seasonal periods s_1..s_M and per-period
// lag orders p_1..p_M. The expanded lag set (the structurally nonzero
// lags of the multiplied-out polynomial) is fixed by (s, p) and computed
// once.
class SarStructure {
 public:
  SarStructure() = default;  // empty structure; fill before use
  SarStructure(std::vector<int> seasons, std::vector<int> orders);

  const std::vector<int>& seasons() const { return seasons_; }
  const std::vector<int>& orders() const { return orders_; }
  int components() const { return int(seasons_.size()); }
  // total number of unrestricted coefficients r = sum p_j
  int total_order() const { return total_order_; }
  // maximal expanded lag
  int p_max() const { return p_max_; }
  // sorted expanded lag set
  const std::vector<int>& lags() const { return lags_; }
  // offset of component j's coefficients inside a theta vector
  int block_offset(int j) const { return block_offsets_[j]; }

 private:
  std::vector<int> seasons_;
  std::vector<int> orders_;
  std::vector<int> lags_;
  std::vector<int> block_offsets_;
  int total_order_ = 0;
  int p_max_ = 0;
};

struct ExpandedRegression {
  std::vector<int> lags;
  Vector coeffs;
};

// Observation noise: a single static sigma or a stochastic-volatility
// path sigma_1..sigma_T.
struct NoiseState {
  enum class Mode { kStatic, kStochasticVolatility };
  Mode mode = Mode::kStatic;
  double sigma = 1.0;
  Vector sigma_path;  // length T when mode == kStochasticVolatility
  // SV log-volatility hyperparameters (mean, persistence, innovation var)
  double sv_mean = 0.0;
  double sv_persistence = 0.9;
  double sv_innovation_var = 0.1;

  double sigma_at(int t) const {  // t in 1..T
    return mode == Mode::kStatic ? sigma : sigma_path[t - 1];
  }
};

// Unrestricted coefficient paths theta_{0:T}, rows t = 0..T.
struct ParamPaths {
  SarStructure structure;
  Matrix theta;  // (T+1) x r
};

namespace detail {

// Multiplies the per-component polynomials 1 - sum_i phi_{ji} L^{i s_j}
// and returns the dense product coefficients c_0..c_{p_max} (c_0 = 1).
template <class T>
void multiply_polynomials(const SarStructure& st, const T* phi,
                          std::vector<T>& dense) {
  dense.assign(st.p_max() + 1, T(0.0));
  dense[0] = T(1.0);
  int used = 0;  // highest degree filled so far
  int idx = 0;
  std::vector<T> next;
  for (int j = 0; j < st.components(); ++j) {
    const int s = st.seasons()[j];
    const int p = st.orders()[j];
    next.assign(used + p * s + 1, T(0.0));
    for (int d = 0; d <= used; ++d) {
      next[d] += dense[d];
      for (int i = 1; i <= p; ++i) {
        next[d + i * s] -= phi[idx + i - 1] * dense[d];
      }
    }
    used += p * s;
    idx += p;
    for (int d = 0; d <= used; ++d) dense[d] = next[d];
  }
}

// theta -> per-block stable phi -> multiplied-out coefficients on the
// expanded lag set (the map g-tilde).
template <class T>
void expand_from_theta(const SarStructure& st, const T* theta, T* out) {
  const int r = st.total_order();
  std::vector<T> pacf(r), phi(r);
  for (int j = 0; j < st.components(); ++j) {
    const int off = st.block_offset(j);
    const int p = st.orders()[j];
    theta_to_pacf_impl(theta + off, pacf.data() + off, p);
    pacf_to_phi_impl(pacf.data() + off, phi.data() + off, p);
  }
  std::vector<T> dense;
  multiply_polynomials(st, phi.data(), dense);
  const auto& lags = st.lags();
  for (size_t i = 0; i < lags.size(); ++i) out[i] = -dense[lags[i]];
}

}  // namespace detail

// Expanded regression coefficients from per-block *stable* coefficients.
ExpandedRegression expand_stable(const SarStructure& st, const Vector& phi);

// Expanded regression coefficients from unrestricted theta (per-block
// stability map, then polynomial multiplication).
ExpandedRegression expand_coeffs(const SarStructure& st, const Vector& theta);

// Jacobian d(expanded coeffs)/d(theta), lags x r, by dual propagation
// through the stability map and the polynomial product jointly.
Matrix expand_jacobian(const SarStructure& st, const Vector& theta);

// x_t = (y_{t-lag_1}, ...); y holds y_1..y_T, t is 1-based and must
// exceed every lag.
Vector design_vector(const Vector& y, const std::vector<int>& lags, int t);

// Recursive simulation y_t = x_t' phi~_t + eps_t with `warmup` discarded
// steps at the t=0 parameters. Throws std::domain_error on a non-stable
// path.
Vector simulate_tvsar(const ParamPaths& paths, const NoiseState& noise,
                      int warmup, Rng& rng);

// Conditional log likelihood sum_{t=p_max+1}^T log N(y_t | x_t' phi~_t,
// sigma_t^2).
double conditional_loglik(const Vector& y, const ParamPaths& paths,
                          const NoiseState& noise);

// Time-t spectral density f(t, w) = (sigma^2/pi) prod_j
// |phi_j(e^{-i s_j w})|^{-2} on a grid of radial frequencies in (0, pi].
Vector spectral_density(const SarStructure& st, const Vector& theta_t,
                        double sigma_t, const Vector& omegas);

}  // namespace tvsar
