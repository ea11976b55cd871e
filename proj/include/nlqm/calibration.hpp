#pragma once

#include <map>
#include <string>

#include "nlqm/rfchain.hpp"

namespace nlqm::calibration {

// One-sided conservative systematic treatment of cable-loss measurements.
struct ErrorPolicy {
  double relative_error = 0.10;
};

enum class PolicyDirection { toward_pm, toward_pa };

// Conservative high-power amplifier gain: nominal minus one systematic sigma.
double effective_hp_gain_db(double nominal_db, double sigma_db);

// Shifts a measured loss by the policy's relative error in the conservative
// direction (more loss on the measurement path raises P_M, more loss on the
// applied path lowers P_A) and returns the resulting linear loss factor
// (power_out = power_in / factor).
double apply_cable_policy(double loss_db, const ErrorPolicy& policy,
                          PolicyDirection direction);

struct ThermalMeasurement {
  double power_at_sa_w = 0.0;  // amplified thermal noise in one RBW bin
  double rbw_hz = 1.0;
  double t_dewar_k = 0.0;
};

struct GeneratorMeasurement {
  double p_generator_dbm = 0.0;
  double il_pre_hemt_db = 0.0;  // generator output -> HEMT input
  double power_at_sa_w = 0.0;   // amplified tone at the SA
};

struct CalibrationSolution {
  double g_hemt_db = 0.0;
  double t_hemt_noise_k = 0.0;
  double il_post_hemt_db = 0.0;  // as assumed during the solve
  double effective_g_hp_db = 0.0;
  // path name ("post_hemt", "hp_path") -> linear loss factor after the error
  // policy; absent paths fall back to the unadjusted assumption.
  std::map<std::string, double> effective_il_factors;

  double post_hemt_il_factor() const;
};

// Two-measurement HEMT solve: the generator tone pins the gain through
// P_out = P_in * G (noise ignorable), then the thermal measurement gives the
// total temperature via S = kB * b * (T_dewar + T_noise) * G / IL.
CalibrationSolution solve_hemt_calibration(const ThermalMeasurement& thermal,
                                           const GeneratorMeasurement& gen,
                                           double il_post_hemt_db);

// Refers a raw SA-plane spectrum to the HEMT input:
// P_hemt = P_sa * IL_post / G_HEMT per bin.
rfchain::CalibratedSpectrum calibrate_spectrum(const rfchain::RawSpectrum& raw,
                                               const CalibrationSolution& sol);

}  // namespace nlqm::calibration
