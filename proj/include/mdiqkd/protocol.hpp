#pragma once

// Round-level Monte Carlo of two SARG04 variants built on the qubit kernel:
//
//  * the entanglement-based protocol: Alice prepares the partially
//    entangled pair cos(pi/8)|0_x 0_x> + sin(pi/8)|1_x 1_x>, rotates the
//    travel half by T_l R^k, Bob undoes his guess (k', l') and applies the
//    local filter; matched indices plus filter success retrieve |phi+>, so
//    kept rounds are Z-correlated;
//
//  * the MDI variant: each party's source is virtualized as |phi+> with
//    R^k applied to the travel half (equivalently, sending R^k|b> for a
//    uniform bit b), both travel qubits meet at Charlie's Bell measurement,
//    and only the announced event class plus k survives sifting.  The twirl
//    index l and the filter play no role here and are not announced.
//
// Charlie's announcement classes map to Bell outcomes through
// kOutcomeOfType below.  The cross-port coincidence is the singlet psi-;
// the same-port coincidence is the projection onto phi- in the
// computational basis (that state reads psi+ in Charlie's +-45deg analyzer
// basis).  phi+ and psi+ are indistinguishable to the linear-optics station
// and count as failures.  Kept rounds satisfy bit_alice XOR flipped =
// bit_bob; on Type1 Alice flips, on Type2 nobody does.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mdiqkd/params.hpp"
#include "mdiqkd/qubit.hpp"

namespace mdiqkd {

// ---------- deterministic splittable RNG ----------

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// splitmix64 stream; cheap enough to construct one per round.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // uniform double in [0, 1) with 53 random bits; identical on every platform
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  int uniform_int(int n) {
    if (n <= 0) throw std::domain_error("uniform_int: n must be positive");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % un;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return static_cast<int>(v % un);
  }

 private:
  std::uint64_t state_;
};

// Substream for one round: reproducible and order-independent across workers.
inline Rng round_rng(std::uint64_t seed, std::uint64_t round_index) {
  return Rng(mix64(seed ^ mix64(round_index + 0x9e3779b97f4a7c15ULL)));
}

// ---------- round bookkeeping ----------

struct NoiseConfig {
  // With probability depolarize the travel qubit is replaced by the
  // maximally mixed state (a uniformly random Pauli is applied).
  double depolarize = 0.0;

  void validate() const {
    if (!(depolarize >= 0.0 && depolarize <= 1.0))
      throw std::domain_error("NoiseConfig: depolarize must be in [0,1]");
  }
};

struct RoundRecord {
  int k = 0, l = 0, k_prime = 0, l_prime = 0;
  bool filter_success = false;
  std::optional<BellOutcome> charlie_outcome;
  std::optional<EventType> event_type;
  std::optional<int> bit_alice, bit_bob;  // raw bits; apply `flipped` to Alice's
  bool kept = false;
  bool flipped = false;
};

struct McSummary {
  long rounds_total = 0;
  long rounds_kept = 0;
  double sift_rate = 0.0;
  double qber = std::numeric_limits<double>::quiet_NaN();
  double stderr_qber = std::numeric_limits<double>::quiet_NaN();
};

// Announcement mapping, kept as named constants so the opposite convention
// is a one-line change.
inline constexpr BellOutcome kOutcomeOfType1 = BellOutcome::psi_minus;
inline constexpr BellOutcome kOutcomeOfType2 = BellOutcome::phi_minus;

inline std::optional<EventType> type_of_outcome(BellOutcome b) {
  if (b == kOutcomeOfType1) return EventType::type1;
  if (b == kOutcomeOfType2) return EventType::type2;
  return std::nullopt;
}

// Type1 keeps every matched k; Type2 keeps only k = k' in {0, 2}.
inline bool mdi_keep(EventType t, int k, int k_prime) {
  if (k != k_prime) return false;
  if (t == EventType::type1) return true;
  return k == 0 || k == 2;
}

inline bool alice_flips(EventType t) { return t == EventType::type1; }

// True when the kept bits violate bit_alice XOR flipped = bit_bob.
inline bool bit_error(EventType t, int bit_alice, int bit_bob) {
  return t == EventType::type1 ? bit_alice == bit_bob : bit_alice != bit_bob;
}

// ---------- shared pieces ----------

// cos(pi/8)|0_x 0_x> + sin(pi/8)|1_x 1_x>; the filter on the travel half
// turns it into |phi+> with success probability 1/4.
inline StateVec sarg_source_state() {
  const double c = std::cos(std::numbers::pi / 8.0);
  const double s = std::sin(std::numbers::pi / 8.0);
  StateVec a = kron(x0(), x0());
  StateVec b = kron(x1(), x1());
  std::vector<cplx> amps(4);
  for (int i = 0; i < 4; ++i) amps[i] = c * a[i] + s * b[i];
  return StateVec(std::move(amps));
}

inline Operator2 pauli_by_index(int i) {
  switch (i) {
    case 0: return identity2();
    case 1: return pauli_x();
    case 2: return pauli_y();
    default: return pauli_z();
  }
}

// Samples the depolarizing channel: identity, or a uniform Pauli kick.
inline Operator2 sample_depolarize(Rng& rng, const NoiseConfig& noise) {
  if (noise.depolarize > 0.0 && rng.uniform() < noise.depolarize)
    return pauli_by_index(rng.uniform_int(4));
  return identity2();
}

// ---------- entanglement-based rounds ----------

inline RoundRecord play_entanglement_round(int k, int l, int k_prime, int l_prime,
                                           Rng& rng, const NoiseConfig& noise) {
  if (k < 0 || k > 3 || k_prime < 0 || k_prime > 3)
    throw std::domain_error("entanglement round: k indices must be in 0..3");
  if (l < 0 || l > 2 || l_prime < 0 || l_prime > 2)
    throw std::domain_error("entanglement round: l indices must be in 0..2");
  noise.validate();

  RoundRecord rec;
  rec.k = k;
  rec.l = l;
  rec.k_prime = k_prime;
  rec.l_prime = l_prime;

  StateVec psi = sarg_source_state();
  const Operator2 u = mul(rotation_T(l), rotation_R(k));
  psi = apply_on(u, 1, psi);
  psi = apply_on(sample_depolarize(rng, noise), 1, psi);
  const Operator2 u_rev = adjoint(mul(rotation_T(l_prime), rotation_R(k_prime)));
  psi = apply_on(u_rev, 1, psi);

  StateVec filtered = apply_on(filter_op(), 1, psi);
  const double p_succ = filtered.norm2();  // psi is normalized
  rec.filter_success = rng.uniform() < p_succ;
  StateVec post = rec.filter_success ? filtered.normalized()
                                     : apply_on(filter_fail_op(), 1, psi).normalized();

  rec.kept = (k == k_prime) && (l == l_prime) && rec.filter_success;
  if (rec.kept) {
    auto [ba, bb] = measure_z_pair(post, rng.uniform());
    rec.bit_alice = ba;
    rec.bit_bob = bb;
  }
  return rec;
}

inline RoundRecord run_entanglement_round(Rng& rng, const NoiseConfig& noise) {
  const int k = rng.uniform_int(4), l = rng.uniform_int(3);
  const int kp = rng.uniform_int(4), lp = rng.uniform_int(3);
  return play_entanglement_round(k, l, kp, lp, rng, noise);
}

// ---------- MDI rounds ----------

inline RoundRecord play_mdi_round(int k, int k_prime, Rng& rng, const NoiseConfig& noise) {
  if (k < 0 || k > 3 || k_prime < 0 || k_prime > 3)
    throw std::domain_error("mdi round: k indices must be in 0..3");
  noise.validate();

  RoundRecord rec;
  rec.k = k;
  rec.k_prime = k_prime;

  // Local Z measurements commute with everything downstream, so the bits
  // are drawn first and the travel qubits collapse to R^k|b>.
  const int bit_a = rng.uniform_int(2);
  const int bit_b = rng.uniform_int(2);
  StateVec travel_a = apply(rotation_R(k), bit_a ? z1() : z0());
  StateVec travel_b = apply(rotation_R(k_prime), bit_b ? z1() : z0());
  travel_a = apply(sample_depolarize(rng, noise), travel_a);
  travel_b = apply(sample_depolarize(rng, noise), travel_b);

  const std::array<double, 4> probs = bell_project(kron(travel_a, travel_b));
  const double draw = rng.uniform();
  double acc = 0.0;
  BellOutcome outcome = BellOutcome::phi_minus;
  for (int i = 0; i < 4; ++i) {
    acc += probs[i];
    if (draw < acc) {
      outcome = static_cast<BellOutcome>(i);
      break;
    }
  }
  rec.charlie_outcome = outcome;
  rec.event_type = type_of_outcome(outcome);
  rec.filter_success = true;  // no filter in the MDI variant

  if (rec.event_type && mdi_keep(*rec.event_type, k, k_prime)) {
    rec.kept = true;
    rec.flipped = alice_flips(*rec.event_type);
    rec.bit_alice = bit_a;
    rec.bit_bob = bit_b;
  }
  return rec;
}

inline RoundRecord run_mdi_round(Rng& rng, const NoiseConfig& noise) {
  const int k = rng.uniform_int(4), kp = rng.uniform_int(4);
  return play_mdi_round(k, kp, rng, noise);
}

// ---------- estimation ----------

inline McSummary estimate(const std::vector<RoundRecord>& records) {
  if (records.empty()) throw std::domain_error("estimate: no records");
  McSummary s;
  s.rounds_total = static_cast<long>(records.size());
  long errors = 0;
  for (const auto& r : records) {
    if (!r.kept) continue;
    ++s.rounds_kept;
    if (r.event_type && r.bit_alice && r.bit_bob &&
        bit_error(*r.event_type, *r.bit_alice, *r.bit_bob))
      ++errors;
    else if (!r.event_type && r.bit_alice && r.bit_bob && *r.bit_alice != *r.bit_bob)
      ++errors;  // entanglement rounds: correlated bits expected, no flip
  }
  s.sift_rate = static_cast<double>(s.rounds_kept) / static_cast<double>(s.rounds_total);
  if (s.rounds_kept > 0) {
    s.qber = static_cast<double>(errors) / static_cast<double>(s.rounds_kept);
    s.stderr_qber = std::sqrt(s.qber * (1.0 - s.qber) / static_cast<double>(s.rounds_kept));
  }
  return s;
}

// ---------- analytic enumeration (closed finite sums, no sampling) ----------

namespace detail {

inline std::array<double, 4> pauli_weights(const NoiseConfig& noise) {
  const double p = noise.depolarize;
  return {1.0 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p};
}

}  // namespace detail

// P(round kept) for the MDI variant, enumerated over k, k', bits, Pauli kicks.
inline double mdi_sift_probability(const NoiseConfig& noise) {
  noise.validate();
  const auto w = detail::pauli_weights(noise);
  double total = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int kp = 0; kp < 4; ++kp)
      for (int ba = 0; ba < 2; ++ba)
        for (int bb = 0; bb < 2; ++bb)
          for (int pa = 0; pa < 4; ++pa)
            for (int pb = 0; pb < 4; ++pb) {
              const double weight = (1.0 / 64.0) * w[pa] * w[pb];
              if (weight == 0.0) continue;
              StateVec ta = apply(pauli_by_index(pa),
                                  apply(rotation_R(k), ba ? z1() : z0()));
              StateVec tb = apply(pauli_by_index(pb),
                                  apply(rotation_R(kp), bb ? z1() : z0()));
              const auto probs = bell_project(kron(ta, tb));
              if (mdi_keep(EventType::type1, k, kp))
                total += weight * probs[static_cast<int>(kOutcomeOfType1)];
              if (mdi_keep(EventType::type2, k, kp))
                total += weight * probs[static_cast<int>(kOutcomeOfType2)];
            }
  return total;
}

// Conditional QBER of kept MDI rounds, same enumeration.
inline double mdi_expected_qber(const NoiseConfig& noise) {
  noise.validate();
  const auto w = detail::pauli_weights(noise);
  double err = 0.0, den = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int kp = 0; kp < 4; ++kp)
      for (int ba = 0; ba < 2; ++ba)
        for (int bb = 0; bb < 2; ++bb)
          for (int pa = 0; pa < 4; ++pa)
            for (int pb = 0; pb < 4; ++pb) {
              const double weight = (1.0 / 64.0) * w[pa] * w[pb];
              if (weight == 0.0) continue;
              StateVec ta = apply(pauli_by_index(pa),
                                  apply(rotation_R(k), ba ? z1() : z0()));
              StateVec tb = apply(pauli_by_index(pb),
                                  apply(rotation_R(kp), bb ? z1() : z0()));
              const auto probs = bell_project(kron(ta, tb));
              for (EventType t : {EventType::type1, EventType::type2}) {
                if (!mdi_keep(t, k, kp)) continue;
                const BellOutcome o = t == EventType::type1 ? kOutcomeOfType1 : kOutcomeOfType2;
                const double p = weight * probs[static_cast<int>(o)];
                den += p;
                if (bit_error(t, ba, bb)) err += p;
              }
            }
  return den > 0.0 ? err / den : std::numeric_limits<double>::quiet_NaN();
}

// P(round kept) for the entanglement-based variant: matched indices times
// the filter success probability, averaged over Pauli kicks.
inline double entanglement_sift_probability(const NoiseConfig& noise) {
  noise.validate();
  const auto w = detail::pauli_weights(noise);
  const StateVec src = sarg_source_state();
  double total = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 3; ++l)
      for (int p = 0; p < 4; ++p) {
        const double weight = (1.0 / 144.0) * w[p];  // 1/144 per (k,l,k'=k,l'=l)
        if (weight == 0.0) continue;
        const Operator2 u = mul(rotation_T(l), rotation_R(k));
        StateVec psi = apply_on(u, 1, src);
        psi = apply_on(pauli_by_index(p), 1, psi);
        psi = apply_on(adjoint(u), 1, psi);
        total += weight * apply_on(filter_op(), 1, psi).norm2();
      }
  return total;
}

// Conditional QBER of kept entanglement-based rounds.
inline double entanglement_expected_qber(const NoiseConfig& noise) {
  noise.validate();
  const auto w = detail::pauli_weights(noise);
  const StateVec src = sarg_source_state();
  double err = 0.0, den = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 3; ++l)
      for (int p = 0; p < 4; ++p) {
        const double weight = (1.0 / 144.0) * w[p];
        if (weight == 0.0) continue;
        const Operator2 u = mul(rotation_T(l), rotation_R(k));
        StateVec psi = apply_on(u, 1, src);
        psi = apply_on(pauli_by_index(p), 1, psi);
        psi = apply_on(adjoint(u), 1, psi);
        const StateVec post = apply_on(filter_op(), 1, psi);  // unnormalized
        den += weight * post.norm2();
        err += weight * (std::norm(post[1]) + std::norm(post[2]));  // |01>, |10>
      }
  return den > 0.0 ? err / den : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace mdiqkd
