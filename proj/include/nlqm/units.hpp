#pragma once

#include <cmath>
#include <stdexcept>

namespace nlqm {

// SI-exact Boltzmann constant, J/K.
inline constexpr double k_boltzmann = 1.380649e-23;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double ratio) {
  if (!(ratio > 0.0)) {
    throw std::domain_error("linear_to_db: ratio must be positive");
  }
  return 10.0 * std::log10(ratio);
}

// dBm = 10*log10(P / 1 mW)
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double watts) {
  if (!(watts > 0.0)) {
    throw std::domain_error("watts_to_dbm: power must be positive");
  }
  return 10.0 * std::log10(watts) + 30.0;
}

}  // namespace nlqm
