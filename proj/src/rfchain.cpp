#include "nlqm/rfchain.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nlqm/errors.hpp"
#include "nlqm/rng.hpp"
#include "nlqm/units.hpp"

namespace nlqm::rfchain {

std::string_view to_string(ReferencePlane plane) {
  return plane == ReferencePlane::sa_input ? "sa_input" : "hemt_input";
}

ReferencePlane reference_plane_from(std::string_view name) {
  if (name == "sa_input") return ReferencePlane::sa_input;
  if (name == "hemt_input") return ReferencePlane::hemt_input;
  throw std::invalid_argument("unknown reference plane: " + std::string(name));
}

SwitchState switch_state_for(int bit) {
  if (bit == 0) return {Sw1Port::port1_load, Sw2Port::port1_signal, false};
  if (bit == 1) return {Sw1Port::port_signal, Sw2Port::port2_hp_load, true};
  throw std::domain_error("switch_state_for: bit must be 0 or 1");
}

void ChainConfig::validate() const {
  if (!(t_dewar_k > 0.0) || t_hemt_noise_k < 0.0) {
    throw std::invalid_argument("ChainConfig: temperatures must be positive");
  }
  if (il_pre_hemt_db < 0.0 || il_hp_path_db < 0.0 || il_post_hemt_db < 0.0) {
    throw std::invalid_argument("ChainConfig: insertion losses must be >= 0 dB");
  }
  if (!(rbw_data_hz > 0.0) || !(rbw_cal_hz > 0.0) || rbw_data_hz > rbw_cal_hz) {
    throw std::invalid_argument("ChainConfig: need 0 < rbw_data_hz <= rbw_cal_hz");
  }
  if (!(span_hz > 0.0)) {
    throw std::invalid_argument("ChainConfig: span must be positive");
  }
  const double ratio = span_hz / rbw_data_hz;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio || std::round(ratio) < 1.0) {
    throw std::invalid_argument("ChainConfig: span/rbw_data must be an integer bin count");
  }
  if (!(inband_fraction > 0.0) || inband_fraction > 1.0) {
    throw std::invalid_argument("ChainConfig: inband_fraction must lie in (0, 1]");
  }
  if (!(p_applied_w > 0.0)) {
    throw std::invalid_argument("ChainConfig: applied power must be positive");
  }
}

int ChainConfig::bin_count() const {
  return static_cast<int>(std::llround(span_hz / rbw_data_hz));
}

int Spectrum::bin_index(double f_hz) const {
  const double offset = (f_hz - f_start_hz) / bin_hz;
  if (offset < 0.0 || offset >= static_cast<double>(bins.size())) {
    throw std::out_of_range("Spectrum: frequency outside span");
  }
  return static_cast<int>(offset);
}

double noise_floor_psd(const ChainConfig& cfg, ReferencePlane plane) {
  cfg.validate();
  const double t_total = cfg.t_dewar_k + cfg.t_hemt_noise_k;
  if (plane == ReferencePlane::hemt_input) return k_boltzmann * t_total;
  return k_boltzmann * t_total * db_to_linear(cfg.g_hemt_db) /
         db_to_linear(cfg.il_post_hemt_db);
}

double leakage_power_w(const ChainConfig& cfg, double epsilon) {
  if (epsilon < 0.0) throw std::domain_error("leakage_power_w: epsilon must be >= 0");
  return epsilon * epsilon * cfg.p_applied_w / 4.0;
}

RawSpectrum synthesize_spectrum(const ChainConfig& cfg, int bit, double epsilon,
                                std::uint64_t seed) {
  cfg.validate();
  const SwitchState state = switch_state_for(bit);  // validates bit
  if (epsilon < 0.0) {
    throw std::domain_error("synthesize_spectrum: epsilon must be >= 0");
  }

  const int n = cfg.bin_count();
  const int center = n / 2;

  RawSpectrum spec;
  spec.bin_hz = cfg.rbw_data_hz;
  spec.rbw_hz = cfg.rbw_data_hz;
  // f0 sits exactly at the center of bin n/2.
  spec.f_start_hz = cfg.f0_hz - (center + 0.5) * cfg.rbw_data_hz;
  spec.plane = ReferencePlane::sa_input;
  spec.switch_state = state;
  spec.seed = seed;
  spec.outside_perturbative = epsilon > 1.0;

  const double mean_w = noise_floor_psd(cfg, ReferencePlane::sa_input) * cfg.rbw_data_hz;
  Rng rng(seed);
  spec.bins.resize(n);
  for (int i = 0; i < n; ++i) {
    spec.bins[i] = rng.exponential(mean_w);
  }

  if (bit == 0 && epsilon > 0.0) {
    const double at_sa = leakage_power_w(cfg, epsilon) * db_to_linear(cfg.g_hemt_db) /
                         db_to_linear(cfg.il_post_hemt_db);
    spec.bins += (1.0 - cfg.inband_fraction) * at_sa / static_cast<double>(n);
    spec.bins[center] += cfg.inband_fraction * at_sa;
  }
  return spec;
}

double measure_inband_fraction(const Spectrum& spec, double narrow_bw_hz,
                               double wide_bw_hz) {
  const int n = static_cast<int>(spec.bins.size());
  if (n < 2) throw std::invalid_argument("measure_inband_fraction: spectrum too short");
  if (!(narrow_bw_hz > 0.0) || narrow_bw_hz > wide_bw_hz) {
    throw std::invalid_argument("measure_inband_fraction: need 0 < narrow_bw <= wide_bw");
  }
  const int k_narrow =
      std::max(1, static_cast<int>(std::llround(narrow_bw_hz / spec.bin_hz)));
  int k_wide = std::max(k_narrow, static_cast<int>(std::llround(wide_bw_hz / spec.bin_hz)));
  k_wide = std::min(k_wide, n);  // wide interval clamps to the span

  // Best narrow window by total power.
  double window = spec.bins.head(k_narrow).sum();
  double best = window;
  int best_start = 0;
  for (int start = 1; start + k_narrow <= n; ++start) {
    window += spec.bins[start + k_narrow - 1] - spec.bins[start - 1];
    if (window > best) {
      best = window;
      best_start = start;
    }
  }

  // Wide window centered on the narrow one, clamped to the span.
  int wide_start = best_start + k_narrow / 2 - k_wide / 2;
  wide_start = std::max(0, std::min(wide_start, n - k_wide));
  const double wide = spec.bins.segment(wide_start, k_wide).sum();

  // Sideband check: the peak bin must clear the out-of-window background by
  // more than 5 sigma, otherwise there is no signal to measure. When the
  // wide window swallows the whole span, the bins outside the narrow window
  // serve as sidebands.
  int side_lo = wide_start, side_len = k_wide;
  if (n - k_wide < 2) {
    side_lo = best_start;
    side_len = k_narrow;
  }
  const int n_side = n - side_len;
  if (n_side >= 2) {
    const double side_sum = spec.bins.sum() - spec.bins.segment(side_lo, side_len).sum();
    const double side_mean = side_sum / n_side;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i >= side_lo && i < side_lo + side_len) continue;
      const double d = spec.bins[i] - side_mean;
      ss += d * d;
    }
    const double side_sigma = std::sqrt(ss / (n_side - 1));
    const double peak = spec.bins.segment(best_start, k_narrow).maxCoeff();
    if (!(peak - side_mean > 5.0 * side_sigma)) {
      throw NoSignalError("measure_inband_fraction: no bin exceeds sidebands by 5 sigma");
    }
  }
  return best / wide;
}

Spectrum refer_spectrum(const Spectrum& spec, double g_hemt_db, double il_post_hemt_db,
                        ReferencePlane target) {
  if (spec.plane == target) return spec;
  const double g = db_to_linear(g_hemt_db);
  const double il = db_to_linear(il_post_hemt_db);
  Spectrum out = spec;
  out.bins *= (target == ReferencePlane::hemt_input) ? il / g : g / il;
  out.plane = target;
  return out;
}

}  // namespace nlqm::rfchain
