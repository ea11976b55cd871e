#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "nlqm/rfchain.hpp"

namespace nlqm::specfit {

struct SidebandStats {
  double mean_w = 0.0;
  double sigma_w = 0.0;
  std::int64_t n_bins = 0;
  double excluded_lo_hz = 0.0;
  double excluded_hi_hz = 0.0;
};

// Rescaled chi-square(2) histogram fit, counts ~ A * 1/2 * exp(-(x-x0)/2)
// over x = 2 P / mean(P).
struct Chi2Fit {
  double amplitude = 0.0;  // A, counts
  double offset = 0.0;     // x0
  double reduced_gof = 0.0;
  double sample_mean_w = 0.0;

  // Mean power implied by the fitted density, watts.
  double implied_mean_w() const { return sample_mean_w * (2.0 + offset) / 2.0; }
};

// P_s: the single RBW bin containing f0.
double signal_region_power(const rfchain::CalibratedSpectrum& spec, double f0_hz);

// Sample mean and standard deviation over all bins whose centers fall
// outside f0 +/- exclude_halfwidth. At least 100 bins must survive.
SidebandStats sideband_stats(const rfchain::CalibratedSpectrum& spec, double f0_hz,
                             double exclude_halfwidth_hz);

// Unweighted least squares on the histogram of x = 2 P / mean(P) with
// ceil(sqrt(n)) bins. A and x0 enter the model only through A*exp(x0/2), so
// the fit resolves that product and reports the ridge point with A pinned to
// the histogram mass n*binwidth. Requires n >= 500.
Chi2Fit fit_chi2_2dof(const Eigen::Ref<const Eigen::ArrayXd>& powers_w);

}  // namespace nlqm::specfit
