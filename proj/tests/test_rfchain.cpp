#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "nlqm/errors.hpp"
#include "nlqm/rfchain.hpp"
#include "nlqm/rng.hpp"
#include "nlqm/units.hpp"
#include "test_support.hpp"

using namespace nlqm;
using namespace nlqm::rfchain;

namespace {

ChainConfig wide_config(double span_hz) {
  ChainConfig cfg;
  cfg.span_hz = span_hz;
  return cfg;
}

// Epsilon whose in-band leakage lands at `z` times the single-bin noise
// sigma at the SA plane.
double epsilon_for_z(const ChainConfig& cfg, double z) {
  const double bin_mean = noise_floor_psd(cfg, ReferencePlane::sa_input) * cfg.rbw_data_hz;
  const double at_sa = z * bin_mean / cfg.inband_fraction;
  const double at_leak = at_sa * db_to_linear(cfg.il_post_hemt_db) / db_to_linear(cfg.g_hemt_db);
  return std::sqrt(4.0 * at_leak / cfg.p_applied_w);
}

}  // namespace

TEST_CASE("dB conversions") {
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(db_to_linear(38.087) == doctest::Approx(6437.25).epsilon(2e-5));
  CHECK(dbm_to_watts(-154.6) == doctest::Approx(3.46737e-19).epsilon(1e-3));
  CHECK_THROWS_AS(linear_to_db(0.0), std::domain_error);
  CHECK_THROWS_AS(linear_to_db(-2.0), std::domain_error);
  CHECK_THROWS_AS(watts_to_dbm(0.0), std::domain_error);

  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double db = -200.0 + 400.0 * rng.uniform();
    CHECK(linear_to_db(db_to_linear(db)) == doctest::Approx(db).epsilon(1e-12));
    const double w = std::pow(10.0, -30.0 + 40.0 * rng.uniform());
    CHECK(dbm_to_watts(watts_to_dbm(w)) == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("noise floor reproduces the paper's -154.6 dBm over 1 Hz") {
  const ChainConfig cfg;
  const double power_1hz = noise_floor_psd(cfg, ReferencePlane::sa_input) * 1.0;
  CHECK(std::abs(watts_to_dbm(power_1hz) - (-154.6)) < 0.05);
}

TEST_CASE("noise floor reduces to k_B*T_dewar with a transparent chain") {
  ChainConfig cfg;
  cfg.t_hemt_noise_k = 0.0;
  cfg.g_hemt_db = 0.0;
  cfg.il_post_hemt_db = 0.0;
  CHECK(noise_floor_psd(cfg, ReferencePlane::sa_input) ==
        doctest::Approx(k_boltzmann * cfg.t_dewar_k).epsilon(1e-12));
}

TEST_CASE("noise floor at the HEMT input over 1 mHz") {
  const ChainConfig cfg;
  const double per_bin = noise_floor_psd(cfg, ReferencePlane::hemt_input) * 1e-3;
  CHECK(per_bin == doctest::Approx(8.32e-26).epsilon(5e-3));
}

TEST_CASE("switch states per bit value") {
  const SwitchState s0 = switch_state_for(0);
  CHECK(s0.sw1 == Sw1Port::port1_load);
  CHECK_FALSE(s0.source_on);
  const SwitchState s1 = switch_state_for(1);
  CHECK(s1.sw2 == Sw2Port::port2_hp_load);
  CHECK(s1.source_on);
  CHECK_THROWS_AS(switch_state_for(2), std::domain_error);
  CHECK_THROWS_AS(switch_state_for(-1), std::domain_error);
}

TEST_CASE("synthesized noise matches the configured floor (law of large numbers)") {
  const ChainConfig cfg = wide_config(100.0);  // 1e5 bins
  const double expected = noise_floor_psd(cfg, ReferencePlane::sa_input) * cfg.rbw_data_hz;
  double sum = 0.0;
  std::int64_t count = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto spec = synthesize_spectrum(cfg, 0, 0.0, Rng::derive(600, rep));
    sum += spec.bins.sum();
    count += spec.bins.size();
  }
  CHECK(count == 1000000);
  CHECK(std::abs(sum / count / expected - 1.0) < 0.005);
}

TEST_CASE("synthesis is deterministic and strictly positive") {
  const ChainConfig cfg;
  const auto a = synthesize_spectrum(cfg, 0, 0.0, 12345);
  const auto b = synthesize_spectrum(cfg, 0, 0.0, 12345);
  REQUIRE(a.bins.size() == b.bins.size());
  for (Eigen::Index i = 0; i < a.bins.size(); ++i) {
    CHECK(a.bins[i] == b.bins[i]);  // bit-identical
    CHECK(a.bins[i] > 0.0);
  }
  CHECK(a.f_start_hz == b.f_start_hz);
}

TEST_CASE("10-sigma injection shows up at 10 sigma over the sidebands") {
  const ChainConfig cfg;
  const double eps = epsilon_for_z(cfg, 10.0);
  const int center = cfg.bin_count() / 2;
  double z_sum = 0.0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    const auto spec = synthesize_spectrum(cfg, 0, eps, Rng::derive(31, rep));
    double side_sum = 0.0, side_sq = 0.0;
    int n_side = 0;
    for (Eigen::Index i = 0; i < spec.bins.size(); ++i) {
      if (std::abs(static_cast<int>(i) - center) <= 10) continue;
      side_sum += spec.bins[i];
      side_sq += spec.bins[i] * spec.bins[i];
      ++n_side;
    }
    const double mean = side_sum / n_side;
    const double sigma = std::sqrt((side_sq - n_side * mean * mean) / (n_side - 1));
    z_sum += (spec.bins[center] - mean) / sigma;
  }
  CHECK(std::abs(z_sum / reps - 10.0) < 1.0);
}

TEST_CASE("bit=1 spectra are noise only regardless of epsilon") {
  const ChainConfig cfg;
  const double eps = epsilon_for_z(cfg, 10.0);
  const int center = cfg.bin_count() / 2;
  double z_sum = 0.0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    const std::uint64_t seed = Rng::derive(77, rep);
    const auto with_eps = synthesize_spectrum(cfg, 1, eps, seed);
    const auto without = synthesize_spectrum(cfg, 1, 0.0, seed);
    for (Eigen::Index i = 0; i < with_eps.bins.size(); ++i) {
      CHECK(with_eps.bins[i] == without.bins[i]);
    }
    double side_sum = 0.0, side_sq = 0.0;
    int n_side = 0;
    for (Eigen::Index i = 0; i < with_eps.bins.size(); ++i) {
      if (std::abs(static_cast<int>(i) - center) <= 10) continue;
      side_sum += with_eps.bins[i];
      side_sq += with_eps.bins[i] * with_eps.bins[i];
      ++n_side;
    }
    const double mean = side_sum / n_side;
    const double sigma = std::sqrt((side_sq - n_side * mean * mean) / (n_side - 1));
    z_sum += (with_eps.bins[center] - mean) / sigma;
  }
  CHECK(std::abs(z_sum / reps) < 0.4);
  CHECK(synthesize_spectrum(cfg, 1, 0.0, 5).switch_state == switch_state_for(1));
}

TEST_CASE("per-bin powers over half-mean are chi-square(2): KS at 1%") {
  const ChainConfig cfg = wide_config(100.0);  // 1e5 bins
  const auto spec = synthesize_spectrum(cfg, 0, 0.0, 424242);
  const double mean = noise_floor_psd(cfg, ReferencePlane::sa_input) * cfg.rbw_data_hz;
  std::vector<double> values(spec.bins.data(), spec.bins.data() + spec.bins.size());
  const double d = testsupport::ks_statistic(
      values, [&](double x) { return testsupport::exponential_cdf(x, mean); });
  CHECK(d < testsupport::ks_critical_1pct(values.size()));
}

TEST_CASE("energy bookkeeping: injected leakage is conserved") {
  const ChainConfig cfg;
  const double eps = 3e-10;
  const auto clean = synthesize_spectrum(cfg, 0, 0.0, 888);
  const auto leaky = synthesize_spectrum(cfg, 0, eps, 888);
  const double injected = (leaky.bins - clean.bins).sum();
  const double expected = leakage_power_w(cfg, eps) * db_to_linear(cfg.g_hemt_db) /
                          db_to_linear(cfg.il_post_hemt_db);
  CHECK(std::abs(injected / expected - 1.0) < 1e-9);
}

TEST_CASE("epsilon edge cases") {
  const ChainConfig cfg;
  CHECK_THROWS_AS(synthesize_spectrum(cfg, 0, -0.1, 1), std::domain_error);
  CHECK_FALSE(synthesize_spectrum(cfg, 0, 0.5, 1).outside_perturbative);
  CHECK(synthesize_spectrum(cfg, 0, 1.5, 1).outside_perturbative);  // warn, not error
}

TEST_CASE("plane referral round trip is the identity") {
  const ChainConfig cfg;
  const auto spec = synthesize_spectrum(cfg, 0, 0.0, 99);
  const auto there = refer_spectrum(spec, cfg.g_hemt_db, cfg.il_post_hemt_db,
                                    ReferencePlane::hemt_input);
  CHECK(there.plane == ReferencePlane::hemt_input);
  const auto back =
      refer_spectrum(there, cfg.g_hemt_db, cfg.il_post_hemt_db, ReferencePlane::sa_input);
  for (Eigen::Index i = 0; i < spec.bins.size(); ++i) {
    CHECK(back.bins[i] == doctest::Approx(spec.bins[i]).epsilon(1e-12));
  }
}

TEST_CASE("measured in-band fraction matches the configured one") {
  ChainConfig cfg;
  const double eps = epsilon_for_z(cfg, 1e6 * cfg.inband_fraction);
  const auto spec = synthesize_spectrum(cfg, 0, eps, 1001);
  const double fraction = measure_inband_fraction(spec, cfg.rbw_data_hz, 1.0);
  CHECK(std::abs(fraction - 0.856) < 0.01);

  // Widening the wide interval from 1 Hz to 2 Hz (clamped to the span)
  // barely moves the ratio.
  const double wider = measure_inband_fraction(spec, cfg.rbw_data_hz, 2.0);
  CHECK(fraction - wider < 0.02);
}

TEST_CASE("all signal in one bin gives fraction 1") {
  Spectrum spec;
  spec.bin_hz = 1e-3;
  spec.rbw_hz = 1e-3;
  spec.f_start_hz = 0.0;
  spec.bins = Eigen::ArrayXd::Constant(1000, 1e-30);
  spec.bins[500] = 1.0;
  CHECK(measure_inband_fraction(spec, 1e-3, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("no signal above 5 sigma is an error") {
  Spectrum flat;
  flat.bin_hz = 1e-3;
  flat.rbw_hz = 1e-3;
  flat.f_start_hz = 0.0;
  flat.bins = Eigen::ArrayXd::Constant(1000, 1e-20);
  CHECK_THROWS_AS(measure_inband_fraction(flat, 1e-3, 1.0), NoSignalError);
}

TEST_CASE("config validation") {
  ChainConfig cfg;
  cfg.span_hz = 1.0005;  // not an integer number of bins
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ChainConfig{};
  cfg.rbw_data_hz = 2.0;  // larger than the calibration RBW
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ChainConfig{};
  cfg.inband_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ChainConfig{};
  cfg.il_post_hemt_db = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("f0 lands in the center bin") {
  const ChainConfig cfg;
  const auto spec = synthesize_spectrum(cfg, 0, 0.0, 3);
  CHECK(spec.bin_index(cfg.f0_hz) == cfg.bin_count() / 2);
  CHECK_THROWS_AS(spec.bin_index(cfg.f0_hz + cfg.span_hz), std::out_of_range);
}
