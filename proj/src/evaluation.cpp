#include "tvsar/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace tvsar {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2Pi = 1.8378770664093454836;

// type-7 (linear interpolation) quantile of an unsorted sample
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * (double(v.size()) - 1.0);
  const size_t lo = size_t(std::floor(pos));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - double(lo);
  return (1.0 - frac) * v[lo] + frac * v[hi];
}

double draw_sigma_at(const Vector& sigma, int t) {
  return sigma.size() == 1 ? sigma[0] : sigma[t - 1];
}

void summarize(SpectralGrid& grid) {
  const int nt = int(grid.times.size());
  const int nw = int(grid.omegas.size());
  grid.log_q025.resize(nt, nw);
  grid.log_median.resize(nt, nw);
  grid.log_q975.resize(nt, nw);
  std::vector<double> cell(grid.values.size());
  for (int i = 0; i < nt; ++i) {
    for (int k = 0; k < nw; ++k) {
      for (size_t j = 0; j < grid.values.size(); ++j) {
        cell[j] = grid.values[j](i, k);
      }
      grid.log_q025(i, k) = quantile(cell, 0.025);
      grid.log_median(i, k) = quantile(cell, 0.5);
      grid.log_q975(i, k) = quantile(cell, 0.975);
    }
  }
}

}  // namespace

Vector default_omegas(int m) {
  if (m < 2) throw std::invalid_argument("need at least 2 frequencies");
  Vector w(m);
  for (int k = 0; k < m; ++k) {
    w[k] = 0.01 + (kPi - 0.01) * double(k) / double(m - 1);
  }
  return w;
}

SpectralGrid spectral_grid(const PosteriorDraws& draws,
                           const std::vector<int>& times,
                           const Vector& omegas) {
  if (draws.theta.empty()) throw std::invalid_argument("no draws");
  SarStructure st(draws.seasons, draws.orders);
  SpectralGrid grid;
  grid.times = times;
  grid.omegas = omegas;
  grid.values.reserve(draws.theta.size());
  for (size_t j = 0; j < draws.theta.size(); ++j) {
    Matrix v(times.size(), omegas.size());
    for (size_t i = 0; i < times.size(); ++i) {
      const int t = times[i];
      const Vector f =
          spectral_density(st, draws.theta[j].row(t).transpose(),
                           draw_sigma_at(draws.sigma[j], t), omegas);
      v.row(i) = f.array().log().matrix().transpose();
    }
    grid.values.push_back(std::move(v));
  }
  summarize(grid);
  return grid;
}

SpectralGrid true_spectral_grid(const ParamPaths& paths,
                                const NoiseState& noise,
                                const std::vector<int>& times,
                                const Vector& omegas) {
  SpectralGrid grid;
  grid.times = times;
  grid.omegas = omegas;
  Matrix v(times.size(), omegas.size());
  for (size_t i = 0; i < times.size(); ++i) {
    const int t = times[i];
    const Vector f =
        spectral_density(paths.structure, paths.theta.row(t).transpose(),
                         noise.sigma_at(t), omegas);
    v.row(i) = f.array().log().matrix().transpose();
  }
  grid.values.push_back(std::move(v));
  summarize(grid);
  return grid;
}

double mse_log_spectral(const SpectralGrid& estimate,
                        const SpectralGrid& truth) {
  if (estimate.times != truth.times ||
      estimate.omegas.size() != truth.omegas.size() ||
      (estimate.omegas - truth.omegas).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("spectral grids are not aligned");
  }
  const Matrix d = estimate.log_median - truth.log_median;
  return d.squaredNorm() / double(d.size());
}

double lps_one_step(const Vector& y_full, int split, const SarStructure& st,
                    const GibbsConfig& config, int refit_every) {
  const int T = int(y_full.size());
  if (split < 1 || split >= T) {
    throw std::invalid_argument("split leaves no test points");
  }
  if (refit_every < 1) throw std::invalid_argument("refit_every must be >= 1");

  Rng prop(config.seed ^ 0x5eed5eed5eed5eedULL);
  const int r = st.total_order();

  double lps = 0.0;
  std::vector<Vector> theta_cur, h_end;
  std::vector<double> sigma_cur;

  for (int i = 0; i < T - split; ++i) {
    const int t = split + 1 + i;  // test point
    if (i % refit_every == 0) {
      GibbsConfig cfg = config;
      cfg.seed = config.seed + 1000003ULL * (std::uint64_t(i / refit_every) + 1);
      const int n_train = t - 1;
      const Vector y_train = y_full.head(n_train);
      PosteriorDraws fit = gibbs_run(y_train, st, cfg);
      const int nj = int(fit.theta.size());
      theta_cur.assign(nj, Vector(r));
      h_end.assign(nj, Vector(r));
      sigma_cur.assign(nj, 0.0);
      for (int j = 0; j < nj; ++j) {
        theta_cur[j] = fit.theta[j].row(n_train).transpose();
        h_end[j] = fit.h[j].row(n_train).transpose();
        sigma_cur[j] = fit.sigma[j][fit.sigma[j].size() - 1];
      }
    }
    const Vector x = design_vector(y_full, st.lags(), t);
    double mix = 0.0;
    for (size_t j = 0; j < theta_cur.size(); ++j) {
      for (int k = 0; k < r; ++k) {
        theta_cur[j][k] += std::exp(0.5 * h_end[j][k]) * prop.normal();
      }
      const Vector coeffs = expand_coeffs(st, theta_cur[j]).coeffs;
      const double s = sigma_cur[j];
      const double e = y_full[t - 1] - x.dot(coeffs);
      mix += std::exp(-0.5 * (kLog2Pi + 2.0 * std::log(s) + e * e / (s * s)));
    }
    mix /= double(theta_cur.size());
    lps += std::log(std::max(mix, 1e-300));
  }
  return lps;
}

double chain_ess(const Vector& chain, bool* zero_variance) {
  const int n = int(chain.size());
  if (n < 10) throw std::invalid_argument("chain too short");
  if (zero_variance) *zero_variance = false;
  const double mean = chain.mean();
  const Vector c = chain.array() - mean;
  const double var = c.squaredNorm() / double(n);
  if (!(var > 0.0)) {
    if (zero_variance) *zero_variance = true;
    return double(n);
  }
  auto rho = [&](int lag) {
    double s = 0.0;
    for (int t = 0; t + lag < n; ++t) s += c[t] * c[t + lag];
    return s / (var * double(n));
  };
  double tau = -1.0;
  for (int m2 = 0; m2 + 1 < n; m2 += 2) {
    const double gamma = rho(m2) + rho(m2 + 1);
    if (gamma <= 0.0) break;
    tau += 2.0 * gamma;
  }
  tau = std::max(tau, 1e-12);
  return double(n) / tau;
}

double update_rate(const Vector& chain) {
  const int n = int(chain.size());
  if (n < 2) throw std::invalid_argument("chain too short");
  int changes = 0;
  for (int t = 1; t < n; ++t) {
    if (chain[t] != chain[t - 1]) ++changes;
  }
  return double(changes) / double(n - 1);
}

ExperimentSpec builtin_experiment(const std::string& id, int T) {
  if (T < 10) throw std::invalid_argument("T too small");
  auto frac = [T](double f) { return int(std::lround(f * T)); };

  // regular component paths shared by the exp1 family
  auto sin_path = [&](int t) {
    const double v = 0.8 * std::sin(kPi * double(t) / double(T));
    return t <= frac(0.5) ? v : -v;
  };
  auto step_path = [&](int t, double lo, double hi, double b1, double b2,
                       double late) {
    if (t <= frac(b1)) return lo;
    if (t <= frac(b2)) return hi;
    return late;
  };

  ExperimentSpec spec;
  spec.id = id;
  spec.sigma = 1.0;

  if (id == "exp1" || id == "exp3") {
    spec.paths.structure = SarStructure({1, 12}, {2, 2});
    spec.paths.theta.resize(T + 1, 4);
    for (int t = 1; t <= T; ++t) {
      spec.paths.theta(t, 0) = sin_path(t);
      spec.paths.theta(t, 1) = id == "exp3" ? 0.0 : -0.8;
      spec.paths.theta(t, 2) = step_path(t, -0.70, 0.0, 0.3, 0.7, 0.95);
      spec.paths.theta(t, 3) = id == "exp3" ? 0.0 : -0.9;
    }
  } else if (id == "exp1-one-lag") {
    spec.paths.structure = SarStructure({1, 12}, {1, 1});
    spec.paths.theta.resize(T + 1, 2);
    for (int t = 1; t <= T; ++t) {
      spec.paths.theta(t, 0) = sin_path(t);
      spec.paths.theta(t, 1) = step_path(t, -0.70, 0.0, 0.3, 0.7, 0.95);
    }
  } else if (id == "exp2") {
    spec.paths.structure = SarStructure({1, 4, 12}, {1, 1, 1});
    spec.paths.theta.resize(T + 1, 3);
    for (int t = 1; t <= T; ++t) {
      spec.paths.theta(t, 0) =
          0.8 * std::sin(kPi * double(t) / double(T));
      spec.paths.theta(t, 1) = 0.5;
      spec.paths.theta(t, 2) = step_path(t, -0.50, 0.0, 0.25, 0.75, 0.95);
    }
  } else {
    throw std::invalid_argument("unknown experiment id: " + id);
  }
  spec.paths.theta.row(0) = spec.paths.theta.row(1);
  return spec;
}

Spectrogram tapered_periodogram(const Vector& y, int window, int hop) {
  const int T = int(y.size());
  if (window < 4 || window > T) {
    throw std::invalid_argument("window must be in [4, T]");
  }
  if (hop < 1) throw std::invalid_argument("hop must be positive");

  Vector taper(window);
  for (int j = 0; j < window; ++j) {
    taper[j] = 0.5 * (1.0 - std::cos(2.0 * kPi * j / double(window - 1)));
  }
  const double norm = kPi * taper.squaredNorm();

  const int nfreq = window / 2;
  Spectrogram out;
  out.omegas.resize(nfreq);
  for (int k = 1; k <= nfreq; ++k) {
    out.omegas[k - 1] = 2.0 * kPi * double(k) / double(window);
  }

  std::vector<Vector> rows;
  for (int start = 0; start + window <= T; start += hop) {
    Vector row(nfreq);
    for (int k = 1; k <= nfreq; ++k) {
      std::complex<double> acc(0.0, 0.0);
      const double w = 2.0 * kPi * double(k) / double(window);
      for (int j = 0; j < window; ++j) {
        acc += taper[j] * y[start + j] *
               std::exp(std::complex<double>(0.0, -w * double(j)));
      }
      row[k - 1] = std::log(std::norm(acc) / norm);
    }
    rows.push_back(std::move(row));
    out.centers.push_back(start + window / 2 + 1);
  }
  out.log_power.resize(rows.size(), nfreq);
  for (size_t i = 0; i < rows.size(); ++i) {
    out.log_power.row(i) = rows[i].transpose();
  }
  return out;
}

}  // namespace tvsar
