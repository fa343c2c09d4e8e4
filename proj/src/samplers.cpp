#include "tvsar/samplers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tvsar/distributions.hpp"

namespace tvsar {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Cholesky with a trace-scaled jitter on the diagonal; throws naming the
// time index if the matrix is not positive definite even then.
Eigen::LLT<Matrix> jittered_llt(Matrix a, int t) {
  const int n = int(a.rows());
  double jitter = 1e-12 * a.trace() / n;
  if (!(jitter > 0.0)) jitter = 1e-300;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Matrix b = a;
    b.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(b);
    if (llt.info() == Eigen::Success) return llt;
    jitter *= 1e4;
  }
  throw std::runtime_error("covariance not positive definite at t=" +
                           std::to_string(t));
}

Vector gaussian_draw(const Vector& mean, const Eigen::LLT<Matrix>& llt,
                     Rng& rng) {
  Vector z(mean.size());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + llt.matrixL() * z;
}

double gaussian_logpdf(const Vector& x, const Vector& mean,
                       const Eigen::LLT<Matrix>& llt) {
  const int n = int(x.size());
  Vector d = llt.matrixL().solve(x - mean);
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
  return -0.5 * n * kLog2Pi - logdet - 0.5 * d.squaredNorm();
}

// Diagonal-Gaussian transition log density, N(x | m, diag(exp(h))).
double diag_transition_logpdf(const Vector& x, const Vector& m,
                              const Vector& h_row) {
  double s = 0.0;
  for (int k = 0; k < x.size(); ++k) {
    const double d = x[k] - m[k];
    s += h_row[k] + d * d * std::exp(-h_row[k]);
  }
  return -0.5 * (x.size() * kLog2Pi + s);
}

// Log of the uniform-over-stability initial density, summed over blocks.
double initial_theta_logpdf(const SarStructure& st, const Vector& theta) {
  double s = 0.0;
  for (int j = 0; j < st.components(); ++j) {
    s += uniform_stable_theta_logpdf(
        theta.segment(st.block_offset(j), st.orders()[j]));
  }
  return s;
}

int sample_categorical(const std::vector<double>& w, Rng& rng) {
  const double u = rng.uniform();
  double c = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    c += w[i];
    if (u <= c) return int(i);
  }
  return int(w.size()) - 1;
}

// Normalizes log weights in place to probabilities; returns false when
// every weight is zero.
bool normalize_log_weights(std::vector<double>& logw, std::vector<double>& w) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double lw : logw) mx = std::max(mx, lw);
  if (!std::isfinite(mx)) return false;
  double sum = 0.0;
  for (size_t i = 0; i < logw.size(); ++i) {
    w[i] = std::exp(logw[i] - mx);
    sum += w[i];
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) return false;
  for (double& x : w) x /= sum;
  return true;
}

}  // namespace

StateSpaceView make_state_space_view(const SarStructure& st, const Vector& y,
                                     const Matrix& h, const NoiseState& noise,
                                     MeasurementMap map) {
  StateSpaceView view;
  view.structure = &st;
  view.y = &y;
  view.h = &h;
  view.noise = &noise;
  view.map = map;
  if (map == MeasurementMap::kIdentity &&
      int(st.lags().size()) != st.total_order()) {
    throw std::invalid_argument(
        "identity measurement map needs as many lags as coefficients");
  }
  const int T = int(y.size());
  const int nlags = int(st.lags().size());
  view.design = Matrix::Zero(T, nlags);
  for (int t = st.p_max() + 1; t <= T; ++t) {
    view.design.row(t - 1) = design_vector(y, st.lags(), t).transpose();
  }
  const int r = st.total_order();
  view.init_prior.means.resize(r);
  view.init_prior.stdevs.resize(r);
  for (int j = 0; j < st.components(); ++j) {
    GaussianPrior block = normal_approx_prior(st.orders()[j]);
    view.init_prior.means.segment(st.block_offset(j), st.orders()[j]) =
        block.means;
    view.init_prior.stdevs.segment(st.block_offset(j), st.orders()[j]) =
        block.stdevs;
  }
  return view;
}

Vector measurement_mean(const StateSpaceView& view, const Vector& theta) {
  if (view.map == MeasurementMap::kIdentity) return theta;
  return expand_coeffs(*view.structure, theta).coeffs;
}

Matrix measurement_jacobian(const StateSpaceView& view, const Vector& theta) {
  if (view.map == MeasurementMap::kIdentity) {
    return Matrix::Identity(theta.size(), theta.size());
  }
  return expand_jacobian(*view.structure, theta);
}

EkfResult ekf_forward(const StateSpaceView& view) {
  const int T = view.T();
  const int r = view.dim();
  const int p_max = view.structure->p_max();
  const Matrix& h = *view.h;

  EkfResult out;
  out.filtered_mean.resize(T + 1, r);
  out.filtered_cov.resize(T + 1);
  out.predicted_cov.resize(T + 1);

  out.filtered_mean.row(0) = view.init_prior.means.transpose();
  out.filtered_cov[0] =
      view.init_prior.stdevs.array().square().matrix().asDiagonal();

  for (int t = 1; t <= T; ++t) {
    Vector m = out.filtered_mean.row(t - 1).transpose();
    Matrix p = out.filtered_cov[t - 1];
    p.diagonal() += h.row(t).array().exp().matrix();
    out.predicted_cov[t] = p;
    if (t > p_max) {
      const Vector x = view.design.row(t - 1).transpose();
      const Vector gm = measurement_mean(view, m);
      const Matrix jac = measurement_jacobian(view, m);
      const Vector hvec = jac.transpose() * x;  // H_t' with H_t = x_t' J
      const double sigma = view.noise->sigma_at(t);
      const Vector ph = p * hvec;
      const double s = hvec.dot(ph) + sigma * sigma;
      const double innov = (*view.y)[t - 1] - x.dot(gm);
      m += ph * (innov / s);
      p -= (ph * ph.transpose()) / s;
      p = 0.5 * (p + p.transpose());
      if (!m.allFinite() || !p.allFinite()) {
        throw std::runtime_error("filter diverged at t=" + std::to_string(t));
      }
    }
    out.filtered_mean.row(t) = m.transpose();
    out.filtered_cov[t] = p;
  }
  return out;
}

GaussianState smoothed_initial(const StateSpaceView& view) {
  const EkfResult f = ekf_forward(view);
  const int T = view.T();
  Vector ms = f.filtered_mean.row(T).transpose();
  Matrix ps = f.filtered_cov[T];
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& pp = f.predicted_cov[t + 1];
    const Matrix gain =
        jittered_llt(pp, t + 1).solve(f.filtered_cov[t]).transpose();
    const Vector mt = f.filtered_mean.row(t).transpose();
    ms = mt + gain * (ms - mt);
    ps = f.filtered_cov[t] + gain * (ps - pp) * gain.transpose();
    ps = 0.5 * (ps + ps.transpose());
  }
  return {ms, ps};
}

Matrix ffbsx_sample(const StateSpaceView& view, Rng& rng) {
  const EkfResult f = ekf_forward(view);
  const int T = view.T();
  const int r = view.dim();
  Matrix path(T + 1, r);
  Vector draw = gaussian_draw(f.filtered_mean.row(T).transpose(),
                              jittered_llt(f.filtered_cov[T], T), rng);
  path.row(T) = draw.transpose();
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& pp = f.predicted_cov[t + 1];
    const Matrix gain =
        jittered_llt(pp, t + 1).solve(f.filtered_cov[t]).transpose();
    const Vector mt = f.filtered_mean.row(t).transpose();
    const Vector mean = mt + gain * (draw - mt);
    Matrix cov = f.filtered_cov[t] - gain * pp * gain.transpose();
    cov = 0.5 * (cov + cov.transpose());
    draw = gaussian_draw(mean, jittered_llt(cov, t), rng);
    path.row(t) = draw.transpose();
  }
  return path;
}

std::pair<Matrix, GaussianState> pgas_init_reference(
    const StateSpaceView& view, int warm_draws, Rng& rng) {
  if (warm_draws < 1) throw std::invalid_argument("warm_draws must be >= 1");
  Matrix ref;
  for (int i = 0; i < warm_draws; ++i) ref = ffbsx_sample(view, rng);
  return {ref, smoothed_initial(view)};
}

Matrix pgas_kernel(const StateSpaceView& view, const Matrix& reference,
                   int n_particles, double ess_min, const GaussianState& q0,
                   Rng& rng, PgasStats* stats) {
  const int T = view.T();
  const int r = view.dim();
  const int p_max = view.structure->p_max();
  const int N = n_particles;
  const int ref_idx = N - 1;
  const Matrix& h = *view.h;
  if (N < 2) throw std::invalid_argument("need at least 2 particles");
  if (reference.rows() != T + 1 || reference.cols() != r) {
    throw std::invalid_argument("reference has wrong shape");
  }

  PgasStats local;
  PgasStats& st = stats ? *stats : local;
  st.min_ess = double(N);

  std::vector<Matrix> part(T + 1, Matrix(N, r));
  std::vector<std::vector<int>> anc(T + 1, std::vector<int>(N));

  const Eigen::LLT<Matrix> q0_llt = jittered_llt(q0.cov, 0);
  std::vector<double> logw(N), w(N);
  for (int i = 0; i < N; ++i) {
    Vector theta = i == ref_idx ? Vector(reference.row(0).transpose())
                                : gaussian_draw(q0.mean, q0_llt, rng);
    part[0].row(i) = theta.transpose();
    logw[i] = initial_theta_logpdf(*view.structure, theta) -
              gaussian_logpdf(theta, q0.mean, q0_llt);
  }
  if (!normalize_log_weights(logw, w)) {
    st.degenerate = true;
    return reference;
  }

  for (int t = 1; t <= T; ++t) {
    const Vector h_row = h.row(t).transpose();
    const Vector sd = (0.5 * h_row.array()).exp().matrix();
    const Vector ref_t = reference.row(t).transpose();

    const double cur_ess = ess(w);
    st.min_ess = std::min(st.min_ess, cur_ess);
    if (cur_ess < ess_min) {
      ++st.resample_events;
      std::vector<int> idx = systematic_resample(w, N - 1, rng);
      for (int i = 0; i < N - 1; ++i) anc[t][i] = idx[i];
      // ancestor sampling of the reference slice
      std::vector<double> alogw(N), aw(N);
      for (int j = 0; j < N; ++j) {
        alogw[j] = std::log(std::max(w[j], 1e-300)) +
                   diag_transition_logpdf(
                       ref_t, part[t - 1].row(j).transpose(), h_row);
      }
      if (!normalize_log_weights(alogw, aw)) {
        st.degenerate = true;
        return reference;
      }
      anc[t][ref_idx] = sample_categorical(aw, rng);
      for (int i = 0; i < N; ++i) logw[i] = 0.0;
    } else {
      for (int i = 0; i < N; ++i) anc[t][i] = i;
      for (int i = 0; i < N; ++i) logw[i] = std::log(std::max(w[i], 1e-300));
    }

    for (int i = 0; i < N; ++i) {
      if (i == ref_idx) {
        part[t].row(i) = ref_t.transpose();
      } else {
        Vector theta = part[t - 1].row(anc[t][i]).transpose();
        for (int k = 0; k < r; ++k) theta[k] += sd[k] * rng.normal();
        part[t].row(i) = theta.transpose();
      }
    }

    if (t > p_max) {
      const Vector x = view.design.row(t - 1).transpose();
      const double sigma = view.noise->sigma_at(t);
      const double yt = (*view.y)[t - 1];
      for (int i = 0; i < N; ++i) {
        const Vector gm = measurement_mean(view, part[t].row(i).transpose());
        const double innov = yt - x.dot(gm);
        logw[i] += -0.5 * (kLog2Pi + 2.0 * std::log(sigma) +
                           innov * innov / (sigma * sigma));
      }
    }
    if (!normalize_log_weights(logw, w)) {
      st.degenerate = true;
      return reference;
    }
  }

  int j = sample_categorical(w, rng);
  Matrix out(T + 1, r);
  out.row(T) = part[T].row(j);
  for (int t = T; t >= 1; --t) {
    j = anc[t][j];
    out.row(t - 1) = part[t - 1].row(j);
  }
  return out;
}

double draw_sigma_static(const Vector& residuals, double v0, double s02,
                         Rng& rng) {
  const double n = double(residuals.size());
  const double vn = v0 + n;
  const double s2n = (v0 * s02 + residuals.squaredNorm()) / vn;
  return sample_scaled_inv_chi2(vn, s2n, rng);
}

NoiseState draw_sv_path(const Vector& residuals, int valid_from,
                        const NoiseState& state, const SvPriors& priors,
                        Rng& rng) {
  const int T = int(residuals.size());
  if (state.mode != NoiseState::Mode::kStochasticVolatility ||
      state.sigma_path.size() != T) {
    throw std::invalid_argument("draw_sv_path needs an SV state of length T");
  }
  OffsetPolicy rule;
  rule.kind = OffsetPolicy::Kind::kDspRule;
  const int n_valid = T - valid_from + 1;
  Vector valid_resid = residuals.segment(valid_from - 1, n_valid);
  const double offset = compute_offset(valid_resid, rule);

  Vector g = (2.0 * state.sigma_path.array().log()).matrix();
  double m = state.sv_mean;
  double rho = state.sv_persistence;
  double zeta2 = state.sv_innovation_var;

  // mixture allocations for observed times
  std::vector<int> alloc(T, 0);
  Vector z = Vector::Zero(T);
  for (int t = valid_from; t <= T; ++t) {
    const double e = residuals[t - 1];
    z[t - 1] = std::log(e * e + offset);
    std::array<double, OmoriMixture::kComponents> lp;
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < OmoriMixture::kComponents; ++j) {
      const double d = z[t - 1] - g[t - 1] - OmoriMixture::means[j];
      lp[j] = std::log(OmoriMixture::weights[j]) -
              0.5 * std::log(OmoriMixture::variances[j]) -
              0.5 * d * d / OmoriMixture::variances[j];
      mx = std::max(mx, lp[j]);
    }
    double sum = 0.0;
    for (double& v : lp) sum += (v = std::exp(v - mx));
    double u = rng.uniform() * sum, c = 0.0;
    for (int j = 0; j < OmoriMixture::kComponents; ++j) {
      c += lp[j];
      if (u <= c) {
        alloc[t - 1] = j;
        break;
      }
    }
  }

  // banded draw of g - m under the stationary AR(1) prior
  const double q = 1.0 / zeta2;
  Vector diag(T), off(std::max(T - 1, 0)), b = Vector::Zero(T);
  for (int t = 0; t < T; ++t) {
    diag[t] = (t + 1 < T) ? q * (1.0 + rho * rho) : q;
    if (t + 1 < T) off[t] = -rho * q;
  }
  if (T == 1) diag[0] = q * (1.0 - rho * rho);
  else diag[0] = q;  // (1-rho^2)q stationary + rho^2 q from the t=2 term
  for (int t = valid_from; t <= T; ++t) {
    const double v2 = OmoriMixture::variances[alloc[t - 1]];
    diag[t - 1] += 1.0 / v2;
    b[t - 1] += (z[t - 1] - m - OmoriMixture::means[alloc[t - 1]]) / v2;
  }
  g = sample_tridiag_gaussian(diag, off, b, rng).array() + m;

  // level
  double prec = 1.0 / (priors.mean_sigma0 * priors.mean_sigma0);
  double lin = priors.mean_mu0 * prec;
  prec += q * (1.0 - rho * rho);
  lin += q * (1.0 - rho * rho) * g[0];
  for (int t = 1; t < T; ++t) {
    prec += q * (1.0 - rho) * (1.0 - rho);
    lin += q * (1.0 - rho) * (g[t] - rho * g[t - 1]);
  }
  m = lin / prec + rng.normal() / std::sqrt(prec);

  // persistence
  double sxx = 0.0, sxy = 0.0;
  for (int t = 1; t < T; ++t) {
    sxx += q * (g[t - 1] - m) * (g[t - 1] - m);
    sxy += q * (g[t - 1] - m) * (g[t] - m);
  }
  const double rprec = 1.0 / (priors.rho_psi0 * priors.rho_psi0) + sxx;
  const double rmean =
      (priors.rho0 / (priors.rho_psi0 * priors.rho_psi0) + sxy) / rprec;
  rho = sample_trunc_normal(rmean, 1.0 / std::sqrt(rprec), -1.0, 1.0, rng);

  // innovation variance
  double ss = (1.0 - rho * rho) * (g[0] - m) * (g[0] - m);
  for (int t = 1; t < T; ++t) {
    const double u = (g[t] - m) - rho * (g[t - 1] - m);
    ss += u * u;
  }
  const double vn = priors.var_v0 + T;
  zeta2 = sample_scaled_inv_chi2(vn, (priors.var_v0 * priors.var_s02 + ss) / vn,
                                 rng);

  NoiseState out = state;
  out.sigma_path = (0.5 * g.array()).exp().matrix();
  out.sv_mean = m;
  out.sv_persistence = rho;
  out.sv_innovation_var = zeta2;
  return out;
}

double static_ar_residual_variance(const Vector& y, const SarStructure& st) {
  const int T = int(y.size());
  const int p_max = st.p_max();
  const int nlags = int(st.lags().size());
  const int n = T - p_max;
  if (n <= nlags) throw std::invalid_argument("series too short for the lags");
  Matrix x(n, nlags);
  Vector yy(n);
  for (int t = p_max + 1; t <= T; ++t) {
    x.row(t - p_max - 1) = design_vector(y, st.lags(), t).transpose();
    yy[t - p_max - 1] = y[t - 1];
  }
  Vector beta = x.colPivHouseholderQr().solve(yy);
  const double rss = (yy - x * beta).squaredNorm();
  return rss / double(n - nlags);
}

PosteriorDraws gibbs_run(const Vector& y, const SarStructure& st,
                         const GibbsConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  const int T = int(y.size());
  const int r = st.total_order();
  const int p_max = st.p_max();
  if (T <= p_max + 1) throw std::invalid_argument("series too short");
  if (config.draws < 1 || config.burnin < 0 || config.thin < 1) {
    throw std::invalid_argument("bad draw/burnin/thin configuration");
  }

  Rng root(config.seed);
  const double s2_ls = static_ar_residual_variance(y, st);

  NoiseState noise;
  if (config.stochastic_volatility) {
    noise.mode = NoiseState::Mode::kStochasticVolatility;
    noise.sigma_path = Vector::Constant(T, std::sqrt(s2_ls));
    noise.sv_mean = std::log(s2_ls);
  } else {
    noise.sigma = std::sqrt(s2_ls);
  }
  SvPriors sv_priors;
  sv_priors.mean_mu0 = std::log(s2_ls);

  Matrix h = Matrix::Constant(T + 1, r, config.dsp_priors.mu0);
  std::vector<DspState> dsp(r);
  for (int k = 0; k < r; ++k) {
    dsp[k].h = h.col(k);
    dsp[k].xi = Vector::Ones(T + 1);
    dsp[k].alloc.assign(T, 0);
    dsp[k].mu = config.dsp_priors.mu0;
    dsp[k].kappa = config.dsp_priors.kappa0;
  }

  StateSpaceView view =
      make_state_space_view(st, y, h, noise, MeasurementMap::kStability);

  PosteriorDraws out;
  out.seasons = st.seasons();
  out.orders = st.orders();
  out.update_rates = Vector::Zero(r);

  Matrix reference;
  GaussianState q0;
  if (config.sampler == GibbsConfig::Sampler::kPgas) {
    Rng warm = root.split(0, 0);
    auto init = pgas_init_reference(view, config.pgas_warm_draws, warm);
    reference = init.first;
    q0 = init.second;
    if (config.run_log) {
      *config.run_log << "event=pgas_init warm_draws=" << config.pgas_warm_draws
                      << "\n";
    }
  }
  if (config.run_log) {
    *config.run_log << "event=init T=" << T << " r=" << r
                    << " sigma2_ls=" << s2_ls << "\n";
  }

  Matrix theta;  // current path
  Matrix prev_theta;
  const int total_iters = config.burnin + config.draws;
  long long rate_iters = 0;

  for (int iter = 1; iter <= total_iters; ++iter) {
    // coefficient path
    Rng path_rng = root.split(iter, 0);
    if (config.sampler == GibbsConfig::Sampler::kFfbsx) {
      theta = ffbsx_sample(view, path_rng);
    } else {
      PgasStats stats;
      theta = pgas_kernel(view, reference,
                          config.particles,
                          config.ess_threshold_frac * config.particles, q0,
                          path_rng, &stats);
      reference = theta;
      out.pgas_resample_events += stats.resample_events;
      if (stats.degenerate && config.run_log) {
        *config.run_log << "event=pgas_degenerate iter=" << iter << "\n";
      }
    }

    if (iter > config.burnin && prev_theta.size() > 0) {
      for (int k = 0; k < r; ++k) {
        int changed = 0;
        for (int t = 0; t <= T; ++t) {
          if (theta(t, k) != prev_theta(t, k)) ++changed;
        }
        out.update_rates[k] += double(changed) / double(T + 1);
      }
      ++rate_iters;
    }
    prev_theta = theta;

    // residuals of the expanded regression
    Vector resid = Vector::Zero(T);
    for (int t = p_max + 1; t <= T; ++t) {
      const Vector gm = measurement_mean(view, theta.row(t).transpose());
      resid[t - 1] = y[t - 1] - view.design.row(t - 1).dot(gm);
    }

    // observation noise
    Rng noise_rng = root.split(iter, 1);
    if (config.stochastic_volatility) {
      noise = draw_sv_path(resid, p_max + 1, noise, sv_priors, noise_rng);
    } else {
      noise.sigma = std::sqrt(draw_sigma_static(
          resid.segment(p_max, T - p_max), config.sigma_v0, s2_ls, noise_rng));
    }

    // dynamic shrinkage blocks
    for (int k = 0; k < r; ++k) {
      Vector nu(T);
      for (int t = 1; t <= T; ++t) nu[t - 1] = theta(t, k) - theta(t - 1, k);
      Rng block_rng = root.split(iter, 2 + k);
      dsp[k] = dsp_block_update(std::move(dsp[k]), nu, config.offset,
                                config.dsp_priors, block_rng);
      h.col(k) = dsp[k].h;
    }

    if (iter > config.burnin && (iter - config.burnin) % config.thin == 0) {
      out.theta.push_back(theta);
      out.h.push_back(h);
      if (config.stochastic_volatility) {
        out.sigma.push_back(noise.sigma_path);
      } else {
        Vector s(1);
        s[0] = noise.sigma;
        out.sigma.push_back(s);
      }
      Vector mu(r), kappa(r);
      for (int k = 0; k < r; ++k) {
        mu[k] = dsp[k].mu;
        kappa[k] = dsp[k].kappa;
      }
      out.mu.push_back(mu);
      out.kappa.push_back(kappa);
    }

    if (config.run_log && iter % 500 == 0) {
      *config.run_log << "event=progress iter=" << iter << "/" << total_iters
                      << "\n";
    }
  }

  if (rate_iters > 0) out.update_rates /= double(rate_iters);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t_start)
                    .count();
  if (config.run_log) {
    *config.run_log << "event=done iters=" << total_iters
                    << " stored=" << out.theta.size()
                    << " seconds=" << out.seconds << "\n";
  }
  return out;
}

}  // namespace tvsar
