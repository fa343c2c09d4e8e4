#pragma once

#include <string>
#include <vector>

#include "tvsar/model.hpp"
#include "tvsar/samplers.hpp"

namespace tvsar {

// Log spectral density evaluated per draw over a (time, frequency) grid,
// with pointwise 2.5% / 50% / 97.5% summaries.
struct SpectralGrid {
  std::vector<int> times;  // 1-based observation indices
  Vector omegas;           // strictly increasing, in (0, pi]
  std::vector<Matrix> values;  // per draw, times x omegas, log scale
  Matrix log_q025, log_median, log_q975;
};

// Default frequency grid: 314 equally spaced points on [0.01, pi].
Vector default_omegas(int m = 314);

SpectralGrid spectral_grid(const PosteriorDraws& draws,
                           const std::vector<int>& times,
                           const Vector& omegas);

// Single-"draw" grid from known parameter paths, for scoring.
SpectralGrid true_spectral_grid(const ParamPaths& paths,
                                const NoiseState& noise,
                                const std::vector<int>& times,
                                const Vector& omegas);

// (1/(T m)) sum of squared log-scale errors between the two median
// surfaces. Throws std::invalid_argument on misaligned grids.
double mse_log_spectral(const SpectralGrid& estimate,
                        const SpectralGrid& truth);

// Sum of log one-step-ahead predictive densities over t = split+1..T.
// Each predictive is a Monte-Carlo mixture over posterior draws with the
// coefficient paths propagated by their own shrinkage process between
// refits; the posterior is refit every `refit_every` test points.
// Mixture densities are floored at 1e-300 before taking logs.
double lps_one_step(const Vector& y_full, int split, const SarStructure& st,
                    const GibbsConfig& config, int refit_every = 12);

// Autocorrelation-time effective sample size with Geyer's initial
// positive sequence truncation. A constant chain returns its length and
// sets *zero_variance.
double chain_ess(const Vector& chain, bool* zero_variance = nullptr);

// Fraction of consecutive pairs that differ.
double update_rate(const Vector& chain);

struct ExperimentSpec {
  std::string id;
  ParamPaths paths;  // unrestricted theta paths, rows 0..T
  double sigma = 1.0;
};

// Synthetic designs from the simulation study; breakpoints scale with T
// (fractions of the printed T=1000 design).
ExperimentSpec builtin_experiment(const std::string& id, int T = 1000);

// Hanning-tapered sliding-window periodogram on the log scale,
// normalized so white noise is flat at log(sigma^2/pi).
struct Spectrogram {
  std::vector<int> centers;  // 1-based window centers
  Vector omegas;
  Matrix log_power;  // windows x omegas
};
Spectrogram tapered_periodogram(const Vector& y, int window = 120,
                                int hop = 36);

}  // namespace tvsar
