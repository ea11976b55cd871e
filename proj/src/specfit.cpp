#include "nlqm/specfit.hpp"

#include <cmath>
#include <stdexcept>

#include "nlqm/errors.hpp"

namespace nlqm::specfit {

double signal_region_power(const rfchain::CalibratedSpectrum& spec, double f0_hz) {
  return spec.bins[spec.bin_index(f0_hz)];
}

SidebandStats sideband_stats(const rfchain::CalibratedSpectrum& spec, double f0_hz,
                             double exclude_halfwidth_hz) {
  if (exclude_halfwidth_hz < 0.0) {
    throw std::invalid_argument("sideband_stats: exclude_halfwidth must be >= 0");
  }
  const int n = static_cast<int>(spec.bins.size());
  const double hw = exclude_halfwidth_hz * (1.0 + 1e-9);

  double sum = 0.0;
  std::int64_t kept = 0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(spec.bin_center_hz(i) - f0_hz) <= hw) continue;
    sum += spec.bins[i];
    ++kept;
  }
  if (kept < 100) {
    throw InsufficientDataError("sideband_stats: fewer than 100 sideband bins");
  }
  const double mean = sum / static_cast<double>(kept);
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(spec.bin_center_hz(i) - f0_hz) <= hw) continue;
    const double d = spec.bins[i] - mean;
    ss += d * d;
  }
  SidebandStats stats;
  stats.mean_w = mean;
  stats.sigma_w = std::sqrt(ss / static_cast<double>(kept - 1));
  stats.n_bins = kept;
  stats.excluded_lo_hz = f0_hz - exclude_halfwidth_hz;
  stats.excluded_hi_hz = f0_hz + exclude_halfwidth_hz;
  return stats;
}

Chi2Fit fit_chi2_2dof(const Eigen::Ref<const Eigen::ArrayXd>& powers_w) {
  const auto n = powers_w.size();
  if (n < 500) throw std::invalid_argument("fit_chi2_2dof: need at least 500 values");

  const double mean = powers_w.mean();
  if (!(mean > 0.0) || powers_w.maxCoeff() == powers_w.minCoeff()) {
    throw DegenerateFitError("fit_chi2_2dof: zero-variance input");
  }

  // Histogram of x = 2 P / mean, ceil(sqrt(n)) equal-width bins.
  const Eigen::ArrayXd x = 2.0 * powers_w / mean;
  const int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  const double width = (hi - lo) / k;
  Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    int b = static_cast<int>((x[i] - lo) / width);
    counts[std::min(b, k - 1)] += 1.0;
  }

  // counts_i = q * g_i with g_i = 1/2 exp(-x_i/2): the model is linear in
  // q = A exp(x0/2), which is all the shape determines.
  Eigen::ArrayXd g(k);
  for (int i = 0; i < k; ++i) {
    g[i] = 0.5 * std::exp(-(lo + (i + 0.5) * width) / 2.0);
  }
  const double q = (counts * g).sum() / (g * g).sum();
  if (!(q > 0.0)) throw DegenerateFitError("fit_chi2_2dof: non-positive fit amplitude");

  Chi2Fit fit;
  fit.sample_mean_w = mean;
  fit.amplitude = static_cast<double>(n) * width;
  fit.offset = 2.0 * std::log(q / fit.amplitude);

  // Reduced goodness of fit with Poisson-scale normalization per bin.
  double chi2 = 0.0;
  for (int i = 0; i < k; ++i) {
    const double model = q * g[i];
    const double d = counts[i] - model;
    chi2 += d * d / std::max(model, 1.0);
  }
  fit.reduced_gof = chi2 / std::max(1, k - 2);
  return fit;
}

}  // namespace nlqm::specfit
