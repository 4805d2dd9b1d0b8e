#pragma once

// Fiber transmittance and photon-number statistics of the weak coherent
// sources.  The relay sits midway, so each pulse travels L/2 km and the
// per-photon channel transmittance is 10^(-alpha L / 20).

#include <cmath>
#include <stdexcept>

namespace mdiqkd {

inline double transmittance(double L_km, double alpha_db_per_km) {
  if (L_km < 0.0) throw std::domain_error("transmittance: L must be >= 0");
  if (!(alpha_db_per_km > 0.0)) throw std::domain_error("transmittance: alpha must be > 0");
  return std::pow(10.0, -alpha_db_per_km * L_km / 20.0);
}

// e^{-mu} mu^m / m!, evaluated in log space for stability.
inline double poisson_weight(double mu, int m) {
  if (!(mu > 0.0)) throw std::domain_error("poisson_weight: mu must be > 0");
  if (m < 0) throw std::domain_error("poisson_weight: m must be >= 0");
  if (m == 0) return std::exp(-mu);
  return std::exp(-mu + m * std::log(mu) - std::lgamma(m + 1.0));
}

}  // namespace mdiqkd
