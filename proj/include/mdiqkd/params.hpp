#pragma once

// Operating parameters of the simulated link and the announcement event
// classes shared by the protocol, optics, and key-rate layers.

#include <cstdio>
#include <stdexcept>
#include <string>

namespace mdiqkd {

// Charlie's two announced success classes: Type1 = cross-port coincidence
// (AT&BR or BT&AR), Type2 = same-port coincidence (AT&AR or BT&BR).
enum class EventType { type1 = 1, type2 = 2 };

inline const char* to_string(EventType t) { return t == EventType::type1 ? "1" : "2"; }

// Error-correction efficiency model: the cubic fit f(x) = 1.1581 + 57.200 x^3
// or a constant factor >= 1.
struct FeMode {
  enum class Kind { enzer_cubic, fixed };

  Kind kind = Kind::enzer_cubic;
  double value = 0.0;  // fixed factor, meaningful only for Kind::fixed

  static FeMode enzer() { return {Kind::enzer_cubic, 0.0}; }
  static FeMode fixed(double v) { return {Kind::fixed, v}; }

  void validate() const {
    if (kind == Kind::fixed && value < 1.0)
      throw std::domain_error("FeMode: fixed factor must be >= 1");
  }

  std::string label() const {
    if (kind == Kind::enzer_cubic) return "enzer";
    char buf[40];
    std::snprintf(buf, sizeof buf, "fixed:%g", value);
    return buf;
  }
};

struct ExperimentParams {
  double eta = 0.045;    // detector efficiency, in (0, 1]
  double dark = 8.5e-7;  // dark-count probability per detector per window, in [0, 1)
  double alpha = 0.21;   // fiber loss, dB/km
  double mu_a = 0.1;     // Alice's mean photon number, > 0
  double mu_b = 0.1;     // Bob's mean photon number, > 0
  FeMode fe = FeMode::enzer();
  int n_max = 6;  // photon-number cutoff of the yield table, >= 2

  void validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("params: eta must be in (0,1]");
    if (!(dark >= 0.0 && dark < 1.0)) throw std::domain_error("params: dark must be in [0,1)");
    if (!(alpha > 0.0)) throw std::domain_error("params: alpha must be > 0");
    if (!(mu_a > 0.0)) throw std::domain_error("params: mu_a must be > 0");
    if (!(mu_b > 0.0)) throw std::domain_error("params: mu_b must be > 0");
    if (n_max < 2) throw std::domain_error("params: n_max must be >= 2");
    fe.validate();
  }
};

}  // namespace mdiqkd
