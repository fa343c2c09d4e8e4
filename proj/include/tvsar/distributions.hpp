#pragma once

#include <array>
#include <vector>

#include "tvsar/rng.hpp"

namespace tvsar {

// 10-component normal mixture approximating the log chi^2_1 distribution.
// Constants from Omori, Chib, Shephard & Nakajima (2007), Table 1.
struct OmoriMixture {
  static constexpr int kComponents = 10;
  static const std::array<double, 10> weights;
  static const std::array<double, 10> means;
  static const std::array<double, 10> variances;
};

// Exact draw from the Polya-Gamma PG(1, c) distribution via the
// alternating-series method of Devroye / Polson-Scott-Windle.
double sample_polya_gamma(double c, Rng& rng);

// Z-distribution draw mu + sigma * logit(B), B ~ Beta(a, b).
double sample_z(double a, double b, double mu, double sigma, Rng& rng);

// Skew-t draw through the Beta characterization
// X = sqrt(a+b) (2Y-1) / (2 sqrt(Y(1-Y))), Y ~ Beta(a, b).
double sample_skew_t(double a, double b, double mu, double sigma, Rng& rng);

// N(mean, sd^2) conditioned to (lo, hi); lo/hi may be +-infinity.
double sample_trunc_normal(double mean, double sd, double lo, double hi,
                           Rng& rng);

// Scale-Inv-chi^2(v, s2) draw, i.e. v*s2 / chi2_v.
double sample_scaled_inv_chi2(double v, double s2, Rng& rng);

// Low-variance stratified ancestor indices; expected multiplicity of
// index i is n * w_i. Weights must sum to 1 within 1e-8.
std::vector<int> systematic_resample(const std::vector<double>& weights, int n,
                                     Rng& rng);

// Effective sample size 1 / sum(w^2) of normalized weights.
double ess(const std::vector<double>& weights);

}  // namespace tvsar
