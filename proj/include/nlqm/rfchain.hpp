#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string_view>

namespace nlqm::rfchain {

enum class ReferencePlane { sa_input, hemt_input };

std::string_view to_string(ReferencePlane plane);
ReferencePlane reference_plane_from(std::string_view name);

enum class Sw1Port { port1_load, port_signal };
enum class Sw2Port { port1_signal, port2_hp_load };

struct SwitchState {
  Sw1Port sw1 = Sw1Port::port1_load;
  Sw2Port sw2 = Sw2Port::port1_signal;
  bool source_on = false;

  friend bool operator==(const SwitchState&, const SwitchState&) = default;
};

// The unique circuit configuration for a bit value: 0 terminates the HEMT
// input on the switch-1 load with the source off, 1 routes the source into
// the high-power load with the source on.
SwitchState switch_state_for(int bit);

// RF-chain constants, paper values as defaults. Units live in the names.
struct ChainConfig {
  double t_dewar_k = 1.921;
  double t_hemt_noise_k = 4.108;
  double g_hemt_db = 38.087;
  double g_hp_amp_db = 60.73;
  double g_hp_amp_sigma_db = 0.6;
  double il_pre_hemt_db = 7.53;   // signal generator -> HEMT input
  double il_hp_path_db = 7.10;    // HP amp output -> HP load
  double il_post_hemt_db = 1.89;  // HEMT output -> SA input
  double rbw_data_hz = 1e-3;
  double rbw_cal_hz = 1.0;
  double f0_hz = 2.5e9;
  double span_hz = 1.0;
  double p_generator_dbm = -130.0;
  double p_applied_w = 7.45;  // P_A
  double inband_fraction = 0.856;

  void validate() const;
  int bin_count() const;  // span_hz / rbw_data_hz
};

// Per-bin power spectrum. Raw synthesis is at the SA input; calibration
// refers it to the HEMT input. Bin i covers
// [f_start + i*bin, f_start + (i+1)*bin).
struct Spectrum {
  double f_start_hz = 0.0;
  double bin_hz = 0.0;
  double rbw_hz = 0.0;
  ReferencePlane plane = ReferencePlane::sa_input;
  std::optional<SwitchState> switch_state;
  std::uint64_t seed = 0;
  bool outside_perturbative = false;  // epsilon > 1 warning flag
  Eigen::ArrayXd bins;  // watts per bin

  int bin_index(double f_hz) const;  // std::out_of_range if outside span
  double bin_center_hz(int i) const { return f_start_hz + (i + 0.5) * bin_hz; }
  double span_hz() const { return bin_hz * static_cast<double>(bins.size()); }
};

using RawSpectrum = Spectrum;
using CalibratedSpectrum = Spectrum;

// System noise power spectral density, W/Hz, at the chosen reference plane.
double noise_floor_psd(const ChainConfig& cfg, ReferencePlane plane);

// NLQM leakage power eps^2 * P_A / 4 at the leak plane (HEMT input).
double leakage_power_w(const ChainConfig& cfg, double epsilon);

// One unaveraged spectrum at the SA input. Every bin is an independent
// exponential draw (chi-square with 2 dof up to scale); for bit = 0 with
// epsilon > 0 the leakage power is added deterministically: the in-band
// fraction into the bin containing f0, the remainder uniform over the span.
// bit = 1 is noise only (source power goes to the HP load).
RawSpectrum synthesize_spectrum(const ChainConfig& cfg, int bit, double epsilon,
                                std::uint64_t seed);

// Peak power in the best narrow_bw window divided by the total power in the
// wide_bw window centered on it. wide_bw is clamped to the span. Throws
// NoSignalError unless some bin clears the sidebands by more than 5 sigma.
double measure_inband_fraction(const Spectrum& spec, double narrow_bw_hz,
                               double wide_bw_hz);

// Refers a spectrum between the SA input and HEMT input planes through the
// HEMT gain and post-HEMT insertion loss.
Spectrum refer_spectrum(const Spectrum& spec, double g_hemt_db, double il_post_hemt_db,
                        ReferencePlane target);

}  // namespace nlqm::rfchain
