#include "nlqm/limits.hpp"

#include <cmath>
#include <stdexcept>

#include "nlqm/errors.hpp"

namespace nlqm::limits {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Acklam's rational approximation of the normal quantile (~1e-9 absolute),
// used only as the Newton starting point.
double probit_estimate(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double u = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
           ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double u = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
           ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  const double u = p - 0.5;
  const double r = u * u;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Solves Q(z) = t by Newton iteration from the Acklam estimate; Q is
// monotone and the derivative is the plain normal pdf, so this converges to
// machine precision in a few steps even deep in the tail.
double upper_tail_inverse(double t) {
  double z = -probit_estimate(t);
  for (int i = 0; i < 4; ++i) {
    const double err = normal_upper_tail(z) - t;
    const double pdf = normal_pdf(z);
    if (pdf <= 0.0) break;
    const double step = err / pdf;
    z += step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
  }
  return z;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / kSqrt2); }

double inverse_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error("inverse_normal_cdf: p must lie in (0, 1)");
  }
  return upper_tail_inverse(1.0 - p);
}

double truncated_normal_ppf(double q, double mu, double sigma, double lower) {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::domain_error("truncated_normal_ppf: q must lie in (0, 1)");
  }
  if (!(sigma > 0.0)) {
    throw std::domain_error("truncated_normal_ppf: sigma must be positive");
  }
  const double alpha = (lower - mu) / sigma;
  // Work in the upper tail: F_trunc(x) = q  <=>  Q(z) = (1-q) Q(alpha).
  const double tail = (1.0 - q) * normal_upper_tail(alpha);
  const double z = upper_tail_inverse(tail);
  return std::max(lower, mu + sigma * z);
}

double power_upper_limit(std::span<const double> excesses_w, double cl,
                         SigmaConvention convention) {
  const std::size_t n = excesses_w.size();
  if (n < 2) {
    throw InsufficientDataError("power_upper_limit: need at least 2 excess values");
  }
  if (!(cl > 0.0) || !(cl < 1.0)) {
    throw std::domain_error("power_upper_limit: cl must lie in (0, 1)");
  }
  double mean = 0.0;
  for (double e : excesses_w) mean += e;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double e : excesses_w) ss += (e - mean) * (e - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double sigma =
      convention == SigmaConvention::standard_error ? sd / std::sqrt(static_cast<double>(n)) : sd;
  if (sigma == 0.0) return std::max(mean, 0.0);  // degenerate sample
  return truncated_normal_ppf(cl, mean, sigma, 0.0);
}

double readout_correction(double f_c) {
  if (!(f_c > 0.0) || f_c > 1.0) {
    throw std::domain_error("readout_correction: f_c must lie in (0, 1]");
  }
  return 1.0 / std::sqrt(f_c);
}

double hadamard_correction(double f_h) {
  if (!(f_h > 0.75) || f_h > 1.0) {
    throw std::domain_error("hadamard_correction: f_h must lie in (0.75, 1]");
  }
  return 1.0 / (2.0 * (0.5 - std::sqrt(1.0 - f_h)));
}

double epsilon_limit(double p_m_w, double p_applied_w, double f_bandwidth,
                     double f_readout, double f_hadamard) {
  if (!(p_m_w > 0.0) || !(p_applied_w > 0.0) || !(f_readout > 0.0) || !(f_hadamard > 0.0)) {
    throw std::domain_error("epsilon_limit: inputs must be positive");
  }
  if (!(f_bandwidth > 0.0) || f_bandwidth > 1.0) {
    throw std::domain_error("epsilon_limit: f_bandwidth must lie in (0, 1]");
  }
  return 2.0 * std::sqrt(p_m_w / (p_applied_w * f_bandwidth)) * f_readout * f_hadamard;
}

bool compare_quantum_classical(double q_mean_w, double c_mean_w, double c_sigma_w,
                               double k) {
  if (c_sigma_w < 0.0) {
    throw std::domain_error("compare_quantum_classical: sigma must be >= 0");
  }
  return q_mean_w > c_mean_w + k * c_sigma_w;
}

std::string_view to_string(DatasetTag tag) {
  return tag == DatasetTag::classical ? "classical" : "quantum";
}

std::string_view to_string(SigmaConvention convention) {
  return convention == SigmaConvention::standard_error ? "standard_error"
                                                       : "per_bit_spread";
}

}  // namespace nlqm::limits
