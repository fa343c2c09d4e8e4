#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "tvsar/distributions.hpp"

using namespace tvsar;

TEST_CASE("omori mixture matches log chi^2_1 moments") {
  double wsum = 0.0, mean = 0.0, m2 = 0.0;
  for (int j = 0; j < OmoriMixture::kComponents; ++j) {
    wsum += OmoriMixture::weights[j];
    mean += OmoriMixture::weights[j] * OmoriMixture::means[j];
    m2 += OmoriMixture::weights[j] *
          (OmoriMixture::variances[j] +
           OmoriMixture::means[j] * OmoriMixture::means[j]);
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-4));
  // E log chi^2_1 = psi(1/2) + log 2, Var = pi^2/2
  CHECK(mean == doctest::Approx(-1.2704).epsilon(0.01));
  CHECK(m2 - mean * mean == doctest::Approx(4.9348).epsilon(0.01));
}

TEST_CASE("polya-gamma moments") {
  auto pg_mean = [](double c) {
    return c == 0.0 ? 0.25 : std::tanh(0.5 * c) / (2.0 * c);
  };
  Rng rng(3);
  for (double c : {0.0, 0.5, 2.0, -2.0, 8.0}) {
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = sample_polya_gamma(c, rng);
      CHECK(x > 0.0);
      s += x;
      s2 += x * x;
    }
    const double mean = s / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    CHECK(mean == doctest::Approx(pg_mean(c)).epsilon(0.02));
    CHECK(std::abs(mean - pg_mean(c)) < 5.0 * sd / std::sqrt(double(n)));
  }
  // PG(1, 0) variance = 1/24
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_polya_gamma(0.0, rng);
    s += x;
    s2 += x * x;
  }
  CHECK(s2 / n - (s / n) * (s / n) ==
        doctest::Approx(1.0 / 24.0).epsilon(0.05));
}

TEST_CASE("polya-gamma exponential tilting against density oracle") {
  // PG(1, c) equals PG(1, 0) tilted by exp(-c^2 x / 2); compare tail
  // probabilities P(X > q) estimated two ways
  Rng rng(9);
  const int n = 200000;
  const double c = 1.5;
  double p_direct = 0.0;
  for (int i = 0; i < n; ++i) {
    p_direct += sample_polya_gamma(c, rng) > 0.25 ? 1.0 : 0.0;
  }
  p_direct /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_polya_gamma(0.0, rng);
    const double w = std::exp(-0.5 * c * c * x);
    num += (x > 0.25) ? w : 0.0;
    den += w;
  }
  CHECK(p_direct == doctest::Approx(num / den).epsilon(0.05));
}

TEST_CASE("z distribution draws") {
  // symmetric case a = b has mean mu; logit(Beta(a,a)) has variance
  // 2 * psi'(a) (trigamma), a=1 -> pi^2/3
  Rng rng(5);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_z(1.0, 1.0, 2.0, 1.0, rng);
    s += x;
    s2 += (x - 2.0) * (x - 2.0);
  }
  CHECK(s / n == doctest::Approx(2.0).epsilon(0.02));
  CHECK(s2 / n == doctest::Approx(M_PI * M_PI / 3.0).epsilon(0.03));
  CHECK_THROWS_AS(sample_z(0.0, 1.0, 0.0, 1.0, rng), std::invalid_argument);
}

TEST_CASE("truncated normal") {
  Rng rng(6);
  // bounds respected and half-normal mean sqrt(2/pi)
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_trunc_normal(0.0, 1.0, 0.0, INFINITY, rng);
    CHECK(x >= 0.0);
    s += x;
  }
  CHECK(s / n == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(0.01));
  // deep tail via the exponential-rejection branch
  for (int i = 0; i < 1000; ++i) {
    const double x = sample_trunc_normal(0.0, 1.0, 5.0, 6.0, rng);
    CHECK(x >= 5.0);
    CHECK(x <= 6.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double x = sample_trunc_normal(0.0, 1.0, -6.0, -5.0, rng);
    CHECK(x >= -6.0);
    CHECK(x <= -5.0);
  }
  // interval case used by the kappa update
  for (int i = 0; i < 1000; ++i) {
    const double x = sample_trunc_normal(0.9, 0.3, -1.0, 1.0, rng);
    CHECK(std::abs(x) < 1.0);
  }
}

TEST_CASE("scaled inverse chi-squared") {
  Rng rng(8);
  const double v = 10.0, s2 = 2.0;
  const int n = 200000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_scaled_inv_chi2(v, s2, rng);
    CHECK(x > 0.0);
    s += x;
  }
  CHECK(s / n == doctest::Approx(v * s2 / (v - 2.0)).epsilon(0.02));
}

TEST_CASE("systematic resampling") {
  Rng rng(4);
  std::vector<double> w = {0.5, 0.25, 0.25};
  const auto idx = systematic_resample(w, 8, rng);
  int counts[3] = {0, 0, 0};
  for (int i : idx) ++counts[i];
  CHECK(counts[0] == 4);  // deterministic multiplicities for exact n*w_i
  CHECK(counts[1] == 2);
  CHECK(counts[2] == 2);
  // indices are nondecreasing by construction
  for (size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] >= idx[i - 1]);

  std::vector<double> bad = {0.5, 0.4};
  CHECK_THROWS_AS(systematic_resample(bad, 4, rng), std::invalid_argument);
}

TEST_CASE("effective sample size of weights") {
  std::vector<double> uniform(10, 0.1);
  CHECK(ess(uniform) == doctest::Approx(10.0));
  std::vector<double> degenerate = {1.0, 0.0, 0.0};
  CHECK(ess(degenerate) == doctest::Approx(1.0));
}
