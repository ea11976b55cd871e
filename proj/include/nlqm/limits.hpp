#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace nlqm::limits {

double normal_cdf(double z);
double normal_pdf(double z);
// Upper tail Q(z) = 1 - Phi(z), accurate far into the tail.
double normal_upper_tail(double z);
// Phi^-1, accurate to a few ulp over (0, 1).
double inverse_normal_cdf(double p);

// Quantile of Normal(mu, sigma) truncated below at `lower`; |CDF(x) - q| is
// driven to machine precision (well inside 1e-10).
double truncated_normal_ppf(double q, double mu, double sigma, double lower = 0.0);

enum class SigmaConvention { standard_error, per_bit_spread };

std::string_view to_string(SigmaConvention convention);

// P_M: truncated-normal upper limit at confidence cl from per-bit calibrated
// excess powers. sigma is the standard error of the mean by default.
double power_upper_limit(std::span<const double> excesses_w, double cl,
                         SigmaConvention convention = SigmaConvention::standard_error);

// 1/sqrt(F_C): statistical dilution of valid events by readout errors.
double readout_correction(double f_c);

// 1/[2*(1/2 - sqrt(1 - F_H))]: leakage-amplitude correction of the imperfect
// equal superposition. Requires f_h > 0.75.
double hadamard_correction(double f_h);

// eps = 2 sqrt(P_M / (P_A * f_bandwidth)) * f_readout * f_hadamard, with
// f_bandwidth the in-band signal fraction and the f_* factors >= 1.
double epsilon_limit(double p_m_w, double p_applied_w, double f_bandwidth,
                     double f_readout, double f_hadamard);

// 5-sigma excess gate; strictly greater, boundary fails safe toward a limit.
bool compare_quantum_classical(double q_mean_w, double c_mean_w, double c_sigma_w,
                               double k = 5.0);

enum class DatasetTag { classical, quantum };

std::string_view to_string(DatasetTag tag);

// Multiplicative corrections as applied to epsilon; all >= 1.
struct CorrectionFactors {
  double f_bandwidth = 1.0;  // 1/sqrt(inband fraction)
  double f_readout = 1.0;
  double f_hadamard = 1.0;
};

struct LimitReport {
  std::optional<double> p_m_w;  // withheld for blinded quantum reports
  double cl = 0.0;
  CorrectionFactors corrections;
  double p_applied_w = 0.0;
  std::optional<double> epsilon_limit;  // absent when an excess was detected
  bool excess_detected = false;
  DatasetTag dataset_tag = DatasetTag::classical;
  // Which sigma entered the truncated normal (the 5-sigma gate always uses
  // the per-bit spread).
  SigmaConvention sigma_convention = SigmaConvention::standard_error;
};

}  // namespace nlqm::limits
