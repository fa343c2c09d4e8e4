#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "tvsar/dsp.hpp"
#include "tvsar/model.hpp"
#include "tvsar/stability.hpp"

namespace tvsar {

// Measurement map of the state-space form: the production map chains the
// per-block stability transform with the polynomial product; the
// identity map is an internal hook that makes the model linear-Gaussian
// so the EKF/FFBSx path can be checked against exact Kalman results.
enum class MeasurementMap { kStability, kIdentity };

// Everything the path samplers need for one sweep: data, expanded design
// rows, the current log-volatility and noise paths and the initial-state
// prior.
struct StateSpaceView {
  const SarStructure* structure = nullptr;
  const Vector* y = nullptr;  // y_1..y_T
  Matrix design;              // T x nlags; row t-1 = x_t, valid for t > p_max
  const Matrix* h = nullptr;  // (T+1) x r
  const NoiseState* noise = nullptr;
  GaussianPrior init_prior;   // Gaussian initial state (FFBSx / EKF)
  MeasurementMap map = MeasurementMap::kStability;

  int T() const { return int(y->size()); }
  int dim() const { return int(h->cols()); }
};

// Builds a view: precomputes design rows and assembles the per-block
// Gaussian initial prior from the Hellinger tables.
StateSpaceView make_state_space_view(const SarStructure& st, const Vector& y,
                                     const Matrix& h, const NoiseState& noise,
                                     MeasurementMap map);

// Measurement mean map g-tilde and its Jacobian under the chosen map.
Vector measurement_mean(const StateSpaceView& view, const Vector& theta);
Matrix measurement_jacobian(const StateSpaceView& view, const Vector& theta);

struct EkfResult {
  Matrix filtered_mean;            // (T+1) x r
  std::vector<Matrix> filtered_cov;   // T+1 entries
  std::vector<Matrix> predicted_cov;  // index t = prediction cov P_{t|t-1}; entry 0 unused
};

// Extended Kalman forward pass: identity transition with Q_t =
// diag(exp(h_t)), first-order linearization of the measurement mean.
EkfResult ekf_forward(const StateSpaceView& view);

// Marginal smoothed moments at t = 0 (Rauch-Tung-Striebel backward pass),
// used as the PGAS initial proposal.
struct GaussianState {
  Vector mean;
  Matrix cov;
};
GaussianState smoothed_initial(const StateSpaceView& view);

// Joint draw of theta_{0:T} by backward sampling from the EKF forward
// pass.
Matrix ffbsx_sample(const StateSpaceView& view, Rng& rng);

struct PgasStats {
  int resample_events = 0;
  bool degenerate = false;  // all weights vanished; reference retained
  double min_ess = 0.0;
};

// One conditional-SMC sweep with ancestor sampling of the reference
// trajectory; bootstrap proposals, ESS-gated systematic resampling.
// If every weight vanishes the sweep keeps the reference trajectory and
// flags it in stats instead of failing.
Matrix pgas_kernel(const StateSpaceView& view, const Matrix& reference,
                   int n_particles, double ess_min, const GaussianState& q0,
                   Rng& rng, PgasStats* stats = nullptr);

// Initial PGAS reference from a short FFBSx run; also returns the
// smoothed t=0 Gaussian used as the initial proposal q0.
std::pair<Matrix, GaussianState> pgas_init_reference(
    const StateSpaceView& view, int warm_draws, Rng& rng);

// Conjugate Scale-Inv-chi^2 update of a static noise variance; returns a
// sigma^2 draw.
double draw_sigma_static(const Vector& residuals, double v0, double s02,
                         Rng& rng);

struct SvPriors {
  double mean_mu0 = 0.0;  // set from log residual variance at init
  double mean_sigma0 = 10.0;
  double rho0 = 0.9;
  double rho_psi0 = 0.1;
  double var_v0 = 5.0;
  double var_s02 = 0.1;
};

// Stochastic-volatility update of sigma_{1:T}: log-chi^2 mixture plus
// banded Gaussian draw of the log-volatility path, then conjugate /
// truncated updates of its mean, persistence and innovation variance.
// Only residuals valid_from..T carry likelihood terms.
NoiseState draw_sv_path(const Vector& residuals, int valid_from,
                        const NoiseState& state, const SvPriors& priors,
                        Rng& rng);

struct GibbsConfig {
  int draws = 10000;
  int burnin = 3000;
  int thin = 10;
  enum class Sampler { kFfbsx, kPgas };
  Sampler sampler = Sampler::kFfbsx;
  int particles = 100;
  double ess_threshold_frac = 0.5;  // resampling threshold as fraction of N
  int pgas_warm_draws = 500;
  OffsetPolicy offset;
  DspPriors dsp_priors;
  double sigma_v0 = 3.0;  // prior dof; scale taken from a static AR fit
  bool stochastic_volatility = false;
  std::uint64_t seed = 0;
  std::ostream* run_log = nullptr;  // line-delimited progress/diagnostics
};

struct PosteriorDraws {
  std::vector<int> seasons;
  std::vector<int> orders;
  std::vector<Matrix> theta;  // per stored draw, (T+1) x r
  std::vector<Matrix> h;      // per stored draw, (T+1) x r
  std::vector<Vector> sigma;  // length 1 (static) or T (SV)
  std::vector<Vector> mu;     // length r
  std::vector<Vector> kappa;  // length r
  Vector update_rates;        // per coefficient, over unthinned draws
  int pgas_resample_events = 0;
  double seconds = 0.0;
};

// Top-level block Gibbs sampler: path update (PGAS or FFBSx), noise
// update, then the per-coefficient DSP blocks.
PosteriorDraws gibbs_run(const Vector& y, const SarStructure& st,
                         const GibbsConfig& config);

// Least-squares fit of the static expanded regression; returns the
// residual variance (used for the noise prior scale and initial sigma).
double static_ar_residual_variance(const Vector& y, const SarStructure& st);

}  // namespace tvsar
