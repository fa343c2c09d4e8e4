#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "tvsar/samplers.hpp"

using namespace tvsar;

namespace {

struct LinearSetup {
  SarStructure st;
  Vector y;
  Matrix h;
  NoiseState noise;
};

// Identity-map test problem: with g-tilde = id the model is exactly
// linear-Gaussian, so plain Kalman recursions are an oracle.
LinearSetup make_linear_setup(int T, std::uint64_t seed) {
  LinearSetup s;
  s.st = SarStructure({1}, {2});
  s.noise.sigma = 0.7;
  Rng rng(seed);
  ParamPaths paths;
  paths.structure = s.st;
  paths.theta = Matrix::Zero(T + 1, 2);
  for (int t = 0; t <= T; ++t) {
    paths.theta(t, 0) = 0.6 * std::sin(3.0 * t / T);
    paths.theta(t, 1) = -0.4;
  }
  s.y = simulate_tvsar(paths, s.noise, 200, rng);
  s.h = Matrix::Constant(T + 1, 2, -1.0);
  s.h.col(1).array() = -1.5;
  return s;
}

struct DenseKf {
  std::vector<Vector> mean;          // filtered, t = 0..T
  std::vector<Matrix> cov;           // filtered
  std::vector<Matrix> pred;          // P_{t|t-1}, entry 0 unused
  std::vector<Vector> smooth_mean;   // t = 0..T
  std::vector<Matrix> smooth_cov;
};

DenseKf dense_kalman(const LinearSetup& s) {
  const int T = int(s.y.size());
  const int r = 2;
  StateSpaceView view = make_state_space_view(s.st, s.y, s.h, s.noise,
                                              MeasurementMap::kIdentity);
  DenseKf out;
  out.mean.assign(T + 1, Vector::Zero(r));
  out.cov.assign(T + 1, Matrix::Zero(r, r));
  out.pred.assign(T + 1, Matrix::Zero(r, r));
  out.mean[0] = view.init_prior.means;
  out.cov[0] = view.init_prior.stdevs.array().square().matrix().asDiagonal();
  for (int t = 1; t <= T; ++t) {
    Vector m = out.mean[t - 1];
    Matrix p = out.cov[t - 1];
    p.diagonal() += s.h.row(t).array().exp().matrix();
    out.pred[t] = p;
    if (t > s.st.p_max()) {
      const Vector x = design_vector(s.y, s.st.lags(), t);
      const double sv = s.noise.sigma * s.noise.sigma;
      const double innov = s.y[t - 1] - x.dot(m);
      const double denom = x.dot(p * x) + sv;
      const Vector gain = p * x / denom;
      m += gain * innov;
      p = (Matrix::Identity(r, r) - gain * x.transpose()) * p;
      p = 0.5 * (p + p.transpose());
    }
    out.mean[t] = m;
    out.cov[t] = p;
  }
  out.smooth_mean.assign(T + 1, Vector::Zero(r));
  out.smooth_cov.assign(T + 1, Matrix::Zero(r, r));
  out.smooth_mean[T] = out.mean[T];
  out.smooth_cov[T] = out.cov[T];
  for (int t = T - 1; t >= 0; --t) {
    const Matrix gain = out.cov[t] * out.pred[t + 1].inverse();
    out.smooth_mean[t] =
        out.mean[t] + gain * (out.smooth_mean[t + 1] - out.mean[t]);
    out.smooth_cov[t] =
        out.cov[t] +
        gain * (out.smooth_cov[t + 1] - out.pred[t + 1]) * gain.transpose();
  }
  return out;
}

}  // namespace

TEST_CASE("filter matches a dense kalman oracle in the linear mode") {
  const int T = 50;
  LinearSetup s = make_linear_setup(T, 7);
  StateSpaceView view = make_state_space_view(s.st, s.y, s.h, s.noise,
                                              MeasurementMap::kIdentity);
  const EkfResult f = ekf_forward(view);
  const DenseKf kf = dense_kalman(s);
  for (int t = 0; t <= T; ++t) {
    CHECK((f.filtered_mean.row(t).transpose() - kf.mean[t])
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK((f.filtered_cov[t] - kf.cov[t]).cwiseAbs().maxCoeff() < 1e-12);
    if (t > 0) {
      CHECK((f.predicted_cov[t] - kf.pred[t]).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("smoothed initial state matches a dense rts oracle") {
  const int T = 50;
  LinearSetup s = make_linear_setup(T, 11);
  StateSpaceView view = make_state_space_view(s.st, s.y, s.h, s.noise,
                                              MeasurementMap::kIdentity);
  const GaussianState q0 = smoothed_initial(view);
  const DenseKf kf = dense_kalman(s);
  CHECK((q0.mean - kf.smooth_mean[0]).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((q0.cov - kf.smooth_cov[0]).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("backward sampling reproduces the smoothed marginals") {
  const int T = 40;
  LinearSetup s = make_linear_setup(T, 13);
  StateSpaceView view = make_state_space_view(s.st, s.y, s.h, s.noise,
                                              MeasurementMap::kIdentity);
  const DenseKf kf = dense_kalman(s);

  const int n = 4000;
  Rng rng(17);
  const int probes[] = {0, T / 2, T};
  Matrix sums = Matrix::Zero(3, 2), sq = Matrix::Zero(3, 2);
  for (int i = 0; i < n; ++i) {
    const Matrix path = ffbsx_sample(view, rng);
    for (int j = 0; j < 3; ++j) {
      sums.row(j) += path.row(probes[j]);
      sq.row(j) += path.row(probes[j]).array().square().matrix();
    }
  }
  for (int j = 0; j < 3; ++j) {
    const int t = probes[j];
    for (int k = 0; k < 2; ++k) {
      const double mean = sums(j, k) / n;
      const double var = sq(j, k) / n - mean * mean;
      const double se = std::sqrt(kf.smooth_cov[t](k, k) / n);
      CHECK(std::abs(mean - kf.smooth_mean[t][k]) < 4.0 * se);
      CHECK(var == doctest::Approx(kf.smooth_cov[t](k, k)).epsilon(0.15));
    }
  }
}

TEST_CASE("pgas kernel shape, determinism and stats") {
  const int T = 30;
  LinearSetup s = make_linear_setup(T, 19);
  StateSpaceView view = make_state_space_view(s.st, s.y, s.h, s.noise,
                                              MeasurementMap::kStability);
  Rng warm(23);
  auto [ref, q0] = pgas_init_reference(view, 5, warm);
  REQUIRE(ref.rows() == T + 1);
  REQUIRE(ref.cols() == 2);

  PgasStats st1, st2;
  Rng r1(29), r2(29);
  const Matrix a = pgas_kernel(view, ref, 50, 25.0, q0, r1, &st1);
  const Matrix b = pgas_kernel(view, ref, 50, 25.0, q0, r2, &st2);
  CHECK(a == b);
  CHECK(st1.resample_events == st2.resample_events);
  CHECK(a.allFinite());
  CHECK(!st1.degenerate);
  CHECK(st1.min_ess > 0.0);
  CHECK(st1.min_ess <= 50.0);
  // the kernel actually moves the path
  CHECK((a - ref).cwiseAbs().maxCoeff() > 0.0);
  Rng bad(1);
  CHECK_THROWS_AS(pgas_kernel(view, ref, 1, 0.5, q0, bad), std::invalid_argument);
}

TEST_CASE("static sigma draw follows its conjugate posterior") {
  const int n = 200;
  Rng maker(31);
  Vector res(n);
  for (int i = 0; i < n; ++i) res[i] = 1.3 * maker.normal();
  const double v0 = 3.0, s02 = 0.5;
  const double v = v0 + n;
  const double s2 = (v0 * s02 + res.squaredNorm()) / v;

  Rng rng(37);
  const int draws = 40000;
  double s = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double sig2 = draw_sigma_static(res, v0, s02, rng);
    CHECK(sig2 > 0.0);
    s += sig2;
  }
  CHECK(s / draws == doctest::Approx(v * s2 / (v - 2.0)).epsilon(0.02));
}

TEST_CASE("stochastic volatility update invariants") {
  const int T = 120;
  Rng maker(41);
  Vector res(T);
  for (int t = 0; t < T; ++t) res[t] = 0.8 * maker.normal();
  NoiseState state;
  state.mode = NoiseState::Mode::kStochasticVolatility;
  state.sigma_path = Vector::Ones(T);
  state.sv_mean = 2.0 * std::log(0.8);
  state.sv_persistence = 0.9;
  state.sv_innovation_var = 0.1;
  SvPriors priors;
  priors.mean_mu0 = state.sv_mean;

  Rng r1(43), r2(43);
  NoiseState a = state, b = state;
  for (int it = 0; it < 10; ++it) {
    a = draw_sv_path(res, 3, a, priors, r1);
    b = draw_sv_path(res, 3, b, priors, r2);
  }
  REQUIRE(a.sigma_path.size() == T);
  CHECK(a.sigma_path.minCoeff() > 0.0);
  CHECK(std::abs(a.sv_persistence) < 1.0);
  CHECK(a.sv_innovation_var > 0.0);
  CHECK(a.sigma_path == b.sigma_path);
  CHECK(a.sv_mean == b.sv_mean);
  // the path should sit near the residual scale, not orders away
  const double mid = a.sigma_path.segment(T / 4, T / 2).mean();
  CHECK(mid > 0.1);
  CHECK(mid < 5.0);
}

TEST_CASE("gibbs driver is deterministic and shapes its output") {
  const int T = 60;
  SarStructure st({1}, {1});
  ParamPaths paths;
  paths.structure = st;
  paths.theta = Matrix::Constant(T + 1, 1, 0.8);
  NoiseState noise;
  noise.sigma = 1.0;
  Rng sim(47);
  const Vector y = simulate_tvsar(paths, noise, 100, sim);

  GibbsConfig cfg;
  cfg.draws = 40;
  cfg.burnin = 20;
  cfg.thin = 2;
  cfg.sampler = GibbsConfig::Sampler::kFfbsx;
  cfg.seed = 51;
  const PosteriorDraws a = gibbs_run(y, st, cfg);
  const PosteriorDraws b = gibbs_run(y, st, cfg);

  REQUIRE(a.theta.size() == 20);  // draws / thin
  REQUIRE(a.h.size() == 20);
  REQUIRE(a.sigma.size() == 20);
  REQUIRE(a.mu.size() == 20);
  CHECK(a.theta[0].rows() == T + 1);
  CHECK(a.theta[0].cols() == 1);
  CHECK(a.sigma[0].size() == 1);  // static noise
  CHECK(a.sigma[0][0] > 0.0);
  REQUIRE(a.update_rates.size() == 1);
  CHECK(a.update_rates[0] > 0.0);
  CHECK(a.update_rates[0] <= 1.0);
  for (size_t i = 0; i < a.theta.size(); ++i) {
    CHECK(a.theta[i] == b.theta[i]);
    CHECK(a.h[i] == b.h[i]);
    CHECK(a.sigma[i] == b.sigma[i]);
  }
  CHECK(a.seconds > 0.0);
}

TEST_CASE("gibbs driver runs the particle path update") {
  const int T = 40;
  SarStructure st({1}, {1});
  ParamPaths paths;
  paths.structure = st;
  paths.theta = Matrix::Constant(T + 1, 1, 0.5);
  NoiseState noise;
  Rng sim(53);
  const Vector y = simulate_tvsar(paths, noise, 100, sim);

  GibbsConfig cfg;
  cfg.draws = 20;
  cfg.burnin = 10;
  cfg.thin = 2;
  cfg.sampler = GibbsConfig::Sampler::kPgas;
  cfg.particles = 30;
  cfg.pgas_warm_draws = 10;
  cfg.seed = 59;
  const PosteriorDraws a = gibbs_run(y, st, cfg);
  const PosteriorDraws b = gibbs_run(y, st, cfg);
  REQUIRE(a.theta.size() == 10);
  CHECK(a.pgas_resample_events >= 0);
  CHECK(a.pgas_resample_events == b.pgas_resample_events);
  for (size_t i = 0; i < a.theta.size(); ++i) CHECK(a.theta[i] == b.theta[i]);
}

TEST_CASE("gibbs driver with stochastic volatility stores a path") {
  const int T = 50;
  SarStructure st({1}, {1});
  ParamPaths paths;
  paths.structure = st;
  paths.theta = Matrix::Constant(T + 1, 1, 0.6);
  NoiseState noise;
  Rng sim(61);
  const Vector y = simulate_tvsar(paths, noise, 100, sim);

  GibbsConfig cfg;
  cfg.draws = 20;
  cfg.burnin = 10;
  cfg.thin = 5;
  cfg.stochastic_volatility = true;
  cfg.seed = 67;
  const PosteriorDraws a = gibbs_run(y, st, cfg);
  REQUIRE(a.sigma.size() == 4);
  CHECK(a.sigma[0].size() == T);
  CHECK(a.sigma[0].minCoeff() > 0.0);
}

TEST_CASE("static residual variance matches a direct least squares fit") {
  const int T = 300;
  SarStructure st({1}, {1});
  ParamPaths paths;
  paths.structure = st;
  paths.theta = Matrix::Constant(T + 1, 1, 0.7);
  NoiseState noise;
  noise.sigma = 2.0;
  Rng sim(71);
  const Vector y = simulate_tvsar(paths, noise, 100, sim);

  // direct scalar AR(1) regression
  double sxy = 0.0, sxx = 0.0;
  for (int t = 2; t <= T; ++t) {
    sxy += y[t - 1] * y[t - 2];
    sxx += y[t - 2] * y[t - 2];
  }
  const double beta = sxy / sxx;
  double rss = 0.0;
  for (int t = 2; t <= T; ++t) {
    const double e = y[t - 1] - beta * y[t - 2];
    rss += e * e;
  }
  const double direct = rss / (T - 2);  // n - nlags observations of freedom
  CHECK(static_ar_residual_variance(y, st) ==
        doctest::Approx(direct).epsilon(1e-8));
}
