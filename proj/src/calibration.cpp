#include "nlqm/calibration.hpp"

#include <stdexcept>

#include "nlqm/errors.hpp"
#include "nlqm/units.hpp"

namespace nlqm::calibration {

double effective_hp_gain_db(double nominal_db, double sigma_db) {
  if (sigma_db < 0.0) {
    throw std::invalid_argument("effective_hp_gain_db: sigma must be >= 0");
  }
  return nominal_db - sigma_db;
}

double apply_cable_policy(double loss_db, const ErrorPolicy& policy,
                          PolicyDirection /*direction*/) {
  if (loss_db < 0.0) throw std::invalid_argument("apply_cable_policy: loss must be >= 0 dB");
  if (policy.relative_error < 0.0) {
    throw std::invalid_argument("apply_cable_policy: relative error must be >= 0");
  }
  // Both conservative directions add loss: toward_PM inflates the loss used
  // to refer measured power back to the reference plane, toward_PA inflates
  // the loss the applied power suffers on its way to the load.
  return db_to_linear(loss_db * (1.0 + policy.relative_error));
}

double CalibrationSolution::post_hemt_il_factor() const {
  auto it = effective_il_factors.find("post_hemt");
  return it != effective_il_factors.end() ? it->second : db_to_linear(il_post_hemt_db);
}

CalibrationSolution solve_hemt_calibration(const ThermalMeasurement& thermal,
                                           const GeneratorMeasurement& gen,
                                           double il_post_hemt_db) {
  if (!(thermal.power_at_sa_w > 0.0) || !(thermal.rbw_hz > 0.0) ||
      !(thermal.t_dewar_k > 0.0)) {
    throw std::invalid_argument("solve_hemt_calibration: invalid thermal measurement");
  }
  if (!(gen.power_at_sa_w > 0.0)) {
    throw std::invalid_argument("solve_hemt_calibration: invalid generator measurement");
  }
  // The generator tone has to dominate the noise floor or the simple
  // P_out = P_in * G relation does not hold.
  if (gen.power_at_sa_w < 10.0 * thermal.power_at_sa_w) {
    throw std::invalid_argument(
        "solve_hemt_calibration: generator power at the SA is below 10x the noise floor");
  }

  const double il_lin = db_to_linear(il_post_hemt_db);
  const double p_in_w = dbm_to_watts(gen.p_generator_dbm - gen.il_pre_hemt_db);
  const double g_lin = gen.power_at_sa_w * il_lin / p_in_w;

  const double psd_sa = thermal.power_at_sa_w / thermal.rbw_hz;
  const double t_total = psd_sa * il_lin / (k_boltzmann * g_lin);

  CalibrationSolution sol;
  sol.g_hemt_db = linear_to_db(g_lin);
  sol.t_hemt_noise_k = t_total - thermal.t_dewar_k;
  sol.il_post_hemt_db = il_post_hemt_db;
  return sol;
}

rfchain::CalibratedSpectrum calibrate_spectrum(const rfchain::RawSpectrum& raw,
                                               const CalibrationSolution& sol) {
  if (raw.plane != rfchain::ReferencePlane::sa_input) {
    throw PlaneMismatchError("calibrate_spectrum: input must be at the SA plane");
  }
  rfchain::CalibratedSpectrum out = raw;
  out.bins *= sol.post_hemt_il_factor() / db_to_linear(sol.g_hemt_db);
  out.plane = rfchain::ReferencePlane::hemt_input;
  return out;
}

}  // namespace nlqm::calibration
