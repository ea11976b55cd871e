#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "nlqm/errors.hpp"
#include "nlqm/limits.hpp"
#include "nlqm/rng.hpp"
#include "test_support.hpp"

using namespace nlqm;
using namespace nlqm::limits;

TEST_CASE("truncated normal ppf: half-normal 90% quantile") {
  const double s = 3.7e-26;
  CHECK(truncated_normal_ppf(0.9, 0.0, s, 0.0) ==
        doctest::Approx(1.6449 * s).epsilon(1e-4));
}

TEST_CASE("truncated normal ppf: q -> 0 approaches the truncation boundary") {
  CHECK(truncated_normal_ppf(1e-12, -1.0, 1.0, 0.0) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(truncated_normal_ppf(1e-12, 0.0, 2.0, 0.0) >= 0.0);
}

TEST_CASE("truncated normal ppf: negligible truncation matches the plain normal") {
  const double s = 1.0;
  CHECK(truncated_normal_ppf(0.9, 10.0 * s, s, 0.0) ==
        doctest::Approx(10.0 * s + 1.2816 * s).epsilon(1e-3));
}

TEST_CASE("truncated normal ppf: domain errors") {
  CHECK_THROWS_AS(truncated_normal_ppf(0.0, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(truncated_normal_ppf(1.0, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(truncated_normal_ppf(-0.5, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(truncated_normal_ppf(0.5, 0.0, 0.0), std::domain_error);
}

TEST_CASE("truncated normal ppf: the solved quantile satisfies the CDF to 1e-10") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const double mu = -5.0 + 25.0 * rng.uniform();
    const double sigma = 0.1 + 5.0 * rng.uniform();
    const double q = 0.01 + 0.98 * rng.uniform();
    const double x = truncated_normal_ppf(q, mu, sigma, 0.0);
    const double alpha = (0.0 - mu) / sigma;
    const double cdf = 1.0 - normal_upper_tail((x - mu) / sigma) / normal_upper_tail(alpha);
    CHECK(std::abs(cdf - q) <= 1e-10);
  }
}

TEST_CASE("truncated normal ppf agrees with the integration oracle on the grid") {
  const double qs[] = {0.01, 0.1, 0.5, 0.9, 0.99};
  const double mus[] = {-5.0, -3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  for (double mu_over_sigma : mus) {
    for (double q : qs) {
      const double sigma = 1.0;
      const double got = truncated_normal_ppf(q, mu_over_sigma, sigma, 0.0);
      const double want =
          testsupport::truncated_normal_ppf_oracle(q, mu_over_sigma, sigma, 0.0);
      CHECK(std::abs(got - want) < 1e-6 * sigma);
    }
  }
}

TEST_CASE("power upper limit: zero-mean sample reduces to the half-normal case") {
  // mean 0 and sem exactly 1: {+a,-a,+a,-a} with a = sqrt(3).
  const double a = std::sqrt(3.0);
  const std::vector<double> excesses = {a, -a, a, -a};
  CHECK(power_upper_limit(excesses, 0.9) == doctest::Approx(1.6449).epsilon(1e-4));
}

TEST_CASE("power upper limit: degenerate sample returns its value") {
  const std::vector<double> equal = {4.2e-25, 4.2e-25, 4.2e-25};
  CHECK(power_upper_limit(equal, 0.9) == 4.2e-25);
  const std::vector<double> negative = {-1.0e-25, -1.0e-25};
  CHECK(power_upper_limit(negative, 0.9) == 0.0);
}

TEST_CASE("power upper limit: error paths") {
  CHECK_THROWS_AS(power_upper_limit(std::vector<double>{1.0}, 0.9),
                  InsufficientDataError);
  CHECK_THROWS_AS(power_upper_limit(std::vector<double>{1.0, 2.0}, 1.5),
                  std::domain_error);
}

TEST_CASE("power upper limit: translation is covariant and never decreases") {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> excesses;
    const int n = 2 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i) excesses.push_back(2.0 * rng.uniform() - 1.0);
    const double base = power_upper_limit(excesses, 0.9);
    const double delta = rng.uniform();
    for (double& e : excesses) e += delta;
    const double shifted = power_upper_limit(excesses, 0.9);
    CHECK(shifted >= base - 1e-12);
    CHECK(shifted <= base + delta + 1e-9 * (1.0 + base));
  }
}

TEST_CASE("readout correction") {
  const double c = readout_correction(0.861);
  char printed[16];
  std::snprintf(printed, sizeof(printed), "%.2f", c);
  CHECK(std::string(printed) == "1.08");
  CHECK(readout_correction(1.0) == 1.0);
  CHECK(readout_correction(0.25) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(readout_correction(0.0), std::domain_error);
}

TEST_CASE("hadamard correction") {
  CHECK(hadamard_correction(0.99) == doctest::Approx(1.25).epsilon(4e-4));
  CHECK(hadamard_correction(1.0) == 1.0);
  CHECK(hadamard_correction(0.9999) == doctest::Approx(1.0204).epsilon(1e-4));
  CHECK_THROWS_AS(hadamard_correction(0.75), std::domain_error);
  CHECK_THROWS_AS(hadamard_correction(0.5), std::domain_error);
}

TEST_CASE("epsilon limit: the paper's correction chain") {
  const double eps = epsilon_limit(6.97e-25, 7.45, 0.856, 1.08, 1.25);
  CHECK(std::abs(eps / 8.93e-13 - 1.0) < 0.01);
  CHECK(epsilon_limit(3.0e-20, 3.0e-20, 1.0, 1.0, 1.0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(epsilon_limit(6.97e-25, 7.45, 1.0, 1.0, 1.0) ==
        doctest::Approx(6.12e-13).epsilon(1e-2));
}

TEST_CASE("epsilon limit: monotone in every argument (property)") {
  Rng rng(4096);
  for (int trial = 0; trial < 200; ++trial) {
    const double p_m = std::pow(10.0, -26.0 + 4.0 * rng.uniform());
    const double p_a = 1.0 + 9.0 * rng.uniform();
    const double f_bw = 0.2 + 0.8 * rng.uniform();
    const double f_ro = 1.0 + rng.uniform();
    const double f_h = 1.0 + rng.uniform();
    const double base = epsilon_limit(p_m, p_a, f_bw, f_ro, f_h);
    CHECK(epsilon_limit(p_m * 1.1, p_a, f_bw, f_ro, f_h) > base);
    CHECK(epsilon_limit(p_m, p_a * 1.1, f_bw, f_ro, f_h) < base);
    CHECK(epsilon_limit(p_m, p_a, std::min(1.0, f_bw * 1.1), f_ro, f_h) <= base);
    CHECK(epsilon_limit(p_m, p_a, f_bw, f_ro * 1.1, f_h) > base);
    CHECK(epsilon_limit(p_m, p_a, f_bw, f_ro, f_h * 1.1) > base);
  }
}

TEST_CASE("5-sigma gate: strict boundary") {
  CHECK_FALSE(compare_quantum_classical(1.0 + 5.0 * 0.1, 1.0, 0.1));  // exactly 5 sigma
  CHECK(compare_quantum_classical(1.0 + 6.0 * 0.1, 1.0, 0.1));
  CHECK_FALSE(compare_quantum_classical(0.0, 0.0, 0.0));
  CHECK_THROWS_AS(compare_quantum_classical(1.0, 1.0, -0.1), std::domain_error);
}

TEST_CASE("upper limits cover the true value 0 under epsilon = 0") {
  Rng rng(1234);
  const double mean = 8.3e-26;
  int covered = 0;
  const int reps = 1000;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> excesses;
    for (int i = 0; i < 10; ++i) excesses.push_back(rng.exponential(mean) - mean);
    if (power_upper_limit(excesses, 0.9) > 0.0) ++covered;
  }
  CHECK(static_cast<double>(covered) / reps >= 0.9 - 0.03);
}

TEST_CASE("inverse normal cdf round trip") {
  Rng rng(21);
  for (int i = 0; i < 500; ++i) {
    const double p = rng.uniform();
    if (p <= 1e-12 || p >= 1.0 - 1e-12) continue;
    CHECK(normal_cdf(inverse_normal_cdf(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::domain_error);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::domain_error);
}
