#pragma once

// Asymptotic secret key rate from a yield table.  Privacy amplification is
// credited only to the photon-number pairs (1,1), (1,2), (2,1); every kept
// event with both pulses non-vacuum pays error correction at the total
// observed bit-error rate:
//
//   K = sum_{privileged (m,n)} Q^{(m,n)} [1 - h2(e_p^{(m,n)})]
//       - Q_tot f(E_tot) h2(E_tot),   clamped at 0.
//
// The totals run over m,n >= 1.  In the infinite-decoy limit the parties
// know each pulse's photon number, and announcements caused by a vacuum
// pulse on either side carry e_b = 1/2 with no extractable key, so they are
// discarded before distillation.  Including them would put a mu-independent
// floor of about 1/6 on E_tot (a one-sided photon pair fakes a coincidence
// at half the (1,1) yield for every intensity), killing the rate for any
// parameters; excluding them is what makes the protocol viable at all.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdiqkd/optics.hpp"
#include "mdiqkd/params.hpp"

namespace mdiqkd {

// Shannon binary entropy; h2(0) = h2(1) = 0 by continuity.
inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: x outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

// Error-correction inefficiency f(e) >= 1.  The bidirectional-protocol fit
// 1.1581 + 57.200 e^3 covers e in [0, 1/2]; fixed mode returns a constant.
inline double error_correction_factor(const FeMode& fe, double e) {
  fe.validate();
  if (fe.kind == FeMode::Kind::fixed) return fe.value;
  if (!(e >= 0.0 && e <= 0.5))
    throw std::domain_error("error_correction_factor: e outside [0, 1/2]");
  return 1.1581 + 57.200 * e * e * e;
}

struct Totals {
  double Q_tot = 0.0;
  double e_tot = 0.0;
};

// No events of this type are ever announced; e_tot is undefined and the
// key-rate caller treats the type as dead (K = 0, flagged).
struct DegenerateTotals : std::domain_error {
  DegenerateTotals() : std::domain_error("totals: Q_tot is zero") {}
};

// Gain and error rate of one event type, summed over the distilled set:
// every cell with m >= 1 and n >= 1 (vacuum-origin announcements are
// discarded under the infinite-decoy limit, see header comment).
inline Totals totals(const YieldTable& t, EventType type) {
  double q = 0.0, qe = 0.0;
  for (int m = 1; m <= t.n_max; ++m)
    for (int n = 1; n <= t.n_max; ++n) {
      const YieldCell& c = t.at(type, m, n);
      q += c.Q;
      qe += c.Q * c.e_b;
    }
  if (!(q > 0.0)) throw DegenerateTotals();
  return {q, qe / q};
}

struct KeyRateComponents {
  double amp11 = 0.0;  // Q^(1,1) [1 - h2(e_p^(1,1))]
  double amp12 = 0.0;
  double amp21 = 0.0;
  double ec_term = 0.0;  // Q_tot f(E) h2(E), always >= 0
  double Q_tot = 0.0;
  double e_tot = 0.0;
  double raw = 0.0;  // before the clamp at zero
  double K = 0.0;
  bool degenerate = false;  // no announced events at all
};

inline KeyRateComponents key_rate_components(const YieldTable& t, EventType type) {
  KeyRateComponents c;
  Totals tot;
  try {
    tot = totals(t, type);
  } catch (const DegenerateTotals&) {
    c.degenerate = true;
    return c;
  }
  c.Q_tot = tot.Q_tot;
  c.e_tot = tot.e_tot;
  const auto amp = [&](int m, int n) {
    const YieldCell& cell = t.at(type, m, n);
    if (cell.Q == 0.0) return 0.0;
    if (!cell.e_p)
      throw std::invalid_argument("key_rate: yield table lacks phase error at privileged cell");
    return cell.Q * (1.0 - binary_entropy(*cell.e_p));
  };
  c.amp11 = amp(1, 1);
  c.amp12 = amp(1, 2);
  c.amp21 = amp(2, 1);
  // e_tot can exceed the fit's domain only in pathological tables; cap the
  // fit argument there, h2 itself is defined on all of [0,1].
  c.ec_term = tot.Q_tot * error_correction_factor(t.params.fe, std::min(tot.e_tot, 0.5)) *
              binary_entropy(tot.e_tot);
  c.raw = c.amp11 + c.amp12 + c.amp21 - c.ec_term;
  c.K = std::max(c.raw, 0.0);
  return c;
}

inline double key_rate(const YieldTable& t, EventType type) {
  return key_rate_components(t, type).K;
}

struct KeyRatePoint {
  double L_km = 0.0;
  EventType type = EventType::type1;
  KeyRateComponents components;
};

}  // namespace mdiqkd
