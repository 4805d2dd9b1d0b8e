// tests/protocol_test.cc
#include "mdiqkd/protocol.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace mdiqkd;

// Test-local enumeration oracle.  Every matrix and amplitude below is spelled
// out with raw trigonometry on std::complex arrays; none of the library's
// qubit machinery is invoked, so agreement is a genuine dual-route check.
namespace {

using C = std::complex<double>;
using Vec2 = std::array<C, 2>;
using Vec4 = std::array<C, 4>;
using Mat2 = std::array<std::array<C, 2>, 2>;

constexpr double kPi = std::numbers::pi;

Mat2 o_rotation(int k) {
  const double t = k * kPi / 4.0, c = std::cos(t), s = std::sin(t);
  return {{{C(c), C(-s)}, {C(s), C(c)}}};
}

Mat2 o_pauli(int p) {
  switch (p) {
    case 0: return {{{C(1), C(0)}, {C(0), C(1)}}};
    case 1: return {{{C(0), C(1)}, {C(1), C(0)}}};
    case 2: return {{{C(0), C(0, -1)}, {C(0, 1), C(0)}}};
    default: return {{{C(1), C(0)}, {C(0), C(-1)}}};
  }
}

// T_0 = I, T_l = cos(pi/4) I - i sin(pi/4)(sigma_Z +- sigma_X)/sqrt(2)
Mat2 o_axis_rotation(int l) {
  if (l == 0) return o_pauli(0);
  const double c = std::cos(kPi / 4.0), s = std::sin(kPi / 4.0);
  const double g = (l == 1 ? 1.0 : -1.0) / std::numbers::sqrt2;
  const double z = 1.0 / std::numbers::sqrt2;
  Mat2 m;
  m[0][0] = C(c, -s * z);
  m[0][1] = C(0, -s * g);
  m[1][0] = C(0, -s * g);
  m[1][1] = C(c, s * z);
  return m;
}

Mat2 o_mul(const Mat2& a, const Mat2& b) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

Mat2 o_dagger(const Mat2& a) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = std::conj(a[j][i]);
  return r;
}

Vec2 o_apply(const Mat2& m, const Vec2& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

// applies m to the second (travel) qubit of a pair amplitude vector
Vec4 o_apply_second(const Mat2& m, const Vec4& v) {
  Vec4 r{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int b2 = 0; b2 < 2; ++b2) r[2 * a + b] += m[b][b2] * v[2 * a + b2];
  return r;
}

Vec4 o_kron(const Vec2& u, const Vec2& v) {
  return {u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]};
}

double o_norm2(const Vec4& v) {
  double s = 0;
  for (const C& x : v) s += std::norm(x);
  return s;
}

// squared Bell overlaps, order psi+, psi-, phi+, phi-
std::array<double, 4> o_bell_probs(const Vec4& s) {
  const double r = std::numbers::sqrt2 / 2;
  return {std::norm(r * s[1] + r * s[2]), std::norm(r * s[1] - r * s[2]),
          std::norm(r * s[0] + r * s[3]), std::norm(r * s[0] - r * s[3])};
}

// filter F = sin(pi/8)|0x><0x| + cos(pi/8)|1x><1x| in the Z basis
Mat2 o_filter() {
  const double s = std::sin(kPi / 8.0), c = std::cos(kPi / 8.0);
  return {{{C((s + c) / 2), C((s - c) / 2)}, {C((s - c) / 2), C((s + c) / 2)}}};
}

// cos(pi/8)|0x0x> + sin(pi/8)|1x1x> spelled out in the Z basis
Vec4 o_source() {
  const double c = std::cos(kPi / 8.0), s = std::sin(kPi / 8.0);
  return {C((c + s) / 2), C((c - s) / 2), C((c - s) / 2), C((c + s) / 2)};
}

std::array<double, 4> o_pauli_weights(double depol) {
  return {1.0 - 0.75 * depol, 0.25 * depol, 0.25 * depol, 0.25 * depol};
}

struct OracleRates {
  double sift = 0.0;
  double qber = 0.0;
};

// full (k, k', bits, Pauli x Pauli) enumeration of the MDI variant
OracleRates oracle_mdi(double depol) {
  const auto w = o_pauli_weights(depol);
  double kept = 0, err = 0;
  for (int k = 0; k < 4; ++k)
    for (int kp = 0; kp < 4; ++kp)
      for (int ba = 0; ba < 2; ++ba)
        for (int bb = 0; bb < 2; ++bb)
          for (int pa = 0; pa < 4; ++pa)
            for (int pb = 0; pb < 4; ++pb) {
              const double weight = w[pa] * w[pb] / 64.0;
              if (weight == 0) continue;
              Vec2 base_a = ba ? Vec2{C(0), C(1)} : Vec2{C(1), C(0)};
              Vec2 base_b = bb ? Vec2{C(0), C(1)} : Vec2{C(1), C(0)};
              const Vec2 ta = o_apply(o_pauli(pa), o_apply(o_rotation(k), base_a));
              const Vec2 tb = o_apply(o_pauli(pb), o_apply(o_rotation(kp), base_b));
              const auto probs = o_bell_probs(o_kron(ta, tb));
              // Type1 <- psi-, kept for every matched k; Type2 <- phi-,
              // kept for matched k in {0,2}; Type1 errs on equal bits
              if (k == kp) {
                kept += weight * probs[1];
                if (ba == bb) err += weight * probs[1];
                if (k == 0 || k == 2) {
                  kept += weight * probs[3];
                  if (ba != bb) err += weight * probs[3];
                }
              }
            }
  return {kept, kept > 0 ? err / kept : 0.0};
}

// full (k, l, k', l', Pauli) enumeration of the entanglement-based variant
OracleRates oracle_entanglement(double depol) {
  const auto w = o_pauli_weights(depol);
  double kept = 0, err = 0;
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 3; ++l)
      for (int p = 0; p < 4; ++p) {
        // unmatched (k', l') rounds are discarded outright; each matched
        // pair carries probability 1/(4*3*4*3)
        const double weight = w[p] / 144.0;
        if (weight == 0) continue;
        const Mat2 u = o_mul(o_axis_rotation(l), o_rotation(k));
        Vec4 psi = o_apply_second(u, o_source());
        psi = o_apply_second(o_pauli(p), psi);
        psi = o_apply_second(o_dagger(u), psi);
        const Vec4 post = o_apply_second(o_filter(), psi);
        kept += weight * o_norm2(post);
        err += weight * (std::norm(post[1]) + std::norm(post[2]));
      }
  return {kept, kept > 0 ? err / kept : 0.0};
}

std::vector<RoundRecord> collect_mdi(long rounds, std::uint64_t seed,
                                     const NoiseConfig& noise) {
  std::vector<RoundRecord> rec;
  rec.reserve(rounds);
  for (long i = 0; i < rounds; ++i) {
    Rng rng = round_rng(seed, static_cast<std::uint64_t>(i));
    rec.push_back(run_mdi_round(rng, noise));
  }
  return rec;
}

std::vector<RoundRecord> collect_entanglement(long rounds, std::uint64_t seed,
                                              const NoiseConfig& noise) {
  std::vector<RoundRecord> rec;
  rec.reserve(rounds);
  for (long i = 0; i < rounds; ++i) {
    Rng rng = round_rng(seed, static_cast<std::uint64_t>(i));
    rec.push_back(run_entanglement_round(rng, noise));
  }
  return rec;
}

}  // namespace

// ---------- keep/flip/error rules ----------

TEST(Protocol, KeepRuleTruthTable) {
  for (int k = 0; k < 4; ++k)
    for (int kp = 0; kp < 4; ++kp) {
      EXPECT_EQ(mdi_keep(EventType::type1, k, kp), k == kp);
      EXPECT_EQ(mdi_keep(EventType::type2, k, kp), k == kp && (k == 0 || k == 2));
    }
  EXPECT_TRUE(alice_flips(EventType::type1));
  EXPECT_FALSE(alice_flips(EventType::type2));
}

TEST(Protocol, BitErrorConvention) {
  // Type1 heralds anti-correlated bits (Alice flips afterwards); Type2
  // heralds correlated bits
  EXPECT_TRUE(bit_error(EventType::type1, 0, 0));
  EXPECT_TRUE(bit_error(EventType::type1, 1, 1));
  EXPECT_FALSE(bit_error(EventType::type1, 0, 1));
  EXPECT_FALSE(bit_error(EventType::type2, 0, 0));
  EXPECT_TRUE(bit_error(EventType::type2, 0, 1));
}

TEST(Protocol, TypeOfOutcomeMapping) {
  EXPECT_EQ(type_of_outcome(kOutcomeOfType1), EventType::type1);
  EXPECT_EQ(type_of_outcome(kOutcomeOfType2), EventType::type2);
  EXPECT_FALSE(type_of_outcome(BellOutcome::psi_plus).has_value());
  EXPECT_FALSE(type_of_outcome(BellOutcome::phi_plus).has_value());
}

// ---------- source state ----------

TEST(Protocol, SourceStateHandAmplitudes) {
  // cos(pi/8)|0x0x> + sin(pi/8)|1x1x| written out in the Z basis
  const double c = std::cos(kPi / 8.0), s = std::sin(kPi / 8.0);
  const StateVec src = sarg_source_state();
  EXPECT_NEAR(src[0].real(), (c + s) / 2, 1e-12);
  EXPECT_NEAR(src[1].real(), (c - s) / 2, 1e-12);
  EXPECT_NEAR(src[2].real(), (c - s) / 2, 1e-12);
  EXPECT_NEAR(src[3].real(), (c + s) / 2, 1e-12);
  EXPECT_NEAR(src.norm2(), 1.0, 1e-12);
}

TEST(Protocol, FilteredSourceBecomesPhiPlus) {
  // the pi/8 filter on the travel half concentrates the source into |phi+>
  // with success probability exactly 1/4
  StateVec filtered = apply_on(filter_op(), 1, sarg_source_state());
  EXPECT_NEAR(filtered.norm2(), 0.25, 1e-12);
  const StateVec post = filtered.normalized();
  const StateVec phip = bell_state(BellOutcome::phi_plus);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(post[i] - phip[i]), 0.0, 1e-12);
}

// ---------- analytic enumerations vs independent oracle ----------

TEST(Protocol, MdiAnalyticsMatchIndependentEnumeration) {
  for (double depol : {0.0, 0.3, 1.0}) {
    const OracleRates o = oracle_mdi(depol);
    EXPECT_NEAR(mdi_sift_probability({depol}), o.sift, 1e-12) << "depol=" << depol;
    EXPECT_NEAR(mdi_expected_qber({depol}), o.qber, 1e-12) << "depol=" << depol;
  }
}

TEST(Protocol, EntanglementAnalyticsMatchIndependentEnumeration) {
  for (double depol : {0.0, 0.3, 1.0}) {
    const OracleRates o = oracle_entanglement(depol);
    EXPECT_NEAR(entanglement_sift_probability({depol}), o.sift, 1e-12)
        << "depol=" << depol;
    EXPECT_NEAR(entanglement_expected_qber({depol}), o.qber, 1e-12)
        << "depol=" << depol;
  }
}

TEST(Protocol, FrozenIdealConstants) {
  // ideal sift rates carry exact closed forms; ideal QBERs vanish
  EXPECT_NEAR(mdi_sift_probability({}), 3.0 / 32.0, 1e-15);
  EXPECT_NEAR(entanglement_sift_probability({}), 1.0 / 48.0, 1e-15);
  EXPECT_NEAR(mdi_expected_qber({}), 0.0, 1e-12);
  EXPECT_NEAR(entanglement_expected_qber({}), 0.0, 1e-12);
}

TEST(Protocol, FullDepolarizationIsMaximallyNoisy) {
  EXPECT_NEAR(mdi_expected_qber({1.0}), 0.5, 1e-12);
  EXPECT_NEAR(entanglement_expected_qber({1.0}), 0.5, 1e-12);
  EXPECT_NEAR(entanglement_sift_probability({1.0}), 1.0 / 24.0, 1e-12);
}

// ---------- Monte Carlo vs analytics ----------

TEST(Protocol, MdiMonteCarloMatchesAnalytics) {
  const long rounds = 100000;
  const McSummary s = estimate(collect_mdi(rounds, 42, {}));
  const double ana = mdi_sift_probability({});
  const double sigma = std::sqrt(ana * (1.0 - ana) / rounds);
  EXPECT_NEAR(s.sift_rate, ana, 3.0 * sigma);
  // ideal channel: zero errors, not merely few
  EXPECT_EQ(s.qber, 0.0);
}

TEST(Protocol, MdiMonteCarloMatchesAnalyticsUnderNoise) {
  const NoiseConfig noise{0.3};
  const long rounds = 100000;
  const McSummary s = estimate(collect_mdi(rounds, 7, noise));
  const double sift = mdi_sift_probability(noise);
  const double qber = mdi_expected_qber(noise);
  EXPECT_NEAR(s.sift_rate, sift, 3.0 * std::sqrt(sift * (1.0 - sift) / rounds));
  EXPECT_NEAR(s.qber, qber, 3.0 * std::sqrt(qber * (1.0 - qber) / s.rounds_kept));
}

TEST(Protocol, EntanglementMonteCarloMatchesAnalytics) {
  const long rounds = 100000;
  for (double depol : {0.0, 0.4}) {
    const McSummary s = estimate(collect_entanglement(rounds, 11, {depol}));
    const double sift = entanglement_sift_probability({depol});
    const double qber = entanglement_expected_qber({depol});
    EXPECT_NEAR(s.sift_rate, sift, 3.0 * std::sqrt(sift * (1.0 - sift) / rounds));
    if (depol == 0.0)
      EXPECT_EQ(s.qber, 0.0);
    else
      EXPECT_NEAR(s.qber, qber, 3.0 * std::sqrt(qber * (1.0 - qber) / s.rounds_kept));
  }
}

TEST(Protocol, KeptRoundFactorization) {
  // kept probability factorizes as P(k=k') P(l=l') P(filter success), with
  // the ideal filter succeeding on the source with probability exactly 1/4
  EXPECT_NEAR(entanglement_sift_probability({}), 0.25 * (1.0 / 3.0) * 0.25, 1e-15);
}

// ---------- per-round invariants ----------

TEST(Protocol, MdiRecordInvariants) {
  for (long i = 0; i < 20000; ++i) {
    Rng rng = round_rng(5, static_cast<std::uint64_t>(i));
    const RoundRecord r = run_mdi_round(rng, {});
    if (r.kept) {
      ASSERT_TRUE(r.event_type.has_value());
      ASSERT_TRUE(r.bit_alice.has_value() && r.bit_bob.has_value());
      EXPECT_TRUE(mdi_keep(*r.event_type, r.k, r.k_prime));
      EXPECT_EQ(r.flipped, alice_flips(*r.event_type));
      // ideal channel: the heralded correlation always holds
      EXPECT_FALSE(bit_error(*r.event_type, *r.bit_alice, *r.bit_bob));
    } else if (r.event_type) {
      EXPECT_FALSE(mdi_keep(*r.event_type, r.k, r.k_prime));
    }
  }
}

TEST(Protocol, EntanglementRecordInvariants) {
  for (long i = 0; i < 20000; ++i) {
    Rng rng = round_rng(6, static_cast<std::uint64_t>(i));
    const RoundRecord r = run_entanglement_round(rng, {});
    EXPECT_EQ(r.kept, r.k == r.k_prime && r.l == r.l_prime && r.filter_success);
    if (r.kept) {
      ASSERT_TRUE(r.bit_alice.has_value() && r.bit_bob.has_value());
      // ideal shared state is |phi+>: bits agree in every kept round
      EXPECT_EQ(*r.bit_alice, *r.bit_bob);
    }
  }
}

TEST(Protocol, RoundsAreReproducible) {
  for (long i = 0; i < 100; ++i) {
    Rng a = round_rng(99, static_cast<std::uint64_t>(i));
    Rng b = round_rng(99, static_cast<std::uint64_t>(i));
    const RoundRecord ra = run_mdi_round(a, {0.2});
    const RoundRecord rb = run_mdi_round(b, {0.2});
    EXPECT_EQ(ra.k, rb.k);
    EXPECT_EQ(ra.k_prime, rb.k_prime);
    EXPECT_EQ(ra.kept, rb.kept);
    EXPECT_EQ(ra.charlie_outcome, rb.charlie_outcome);
    EXPECT_EQ(ra.bit_alice, rb.bit_alice);
    EXPECT_EQ(ra.bit_bob, rb.bit_bob);
  }
}

TEST(Protocol, ArgumentValidation) {
  Rng rng(1);
  EXPECT_THROW(play_mdi_round(4, 0, rng, {}), std::domain_error);
  EXPECT_THROW(play_mdi_round(0, -1, rng, {}), std::domain_error);
  EXPECT_THROW(play_entanglement_round(0, 3, 0, 0, rng, {}), std::domain_error);
  EXPECT_THROW(play_mdi_round(0, 0, rng, {-0.1}), std::domain_error);
  EXPECT_THROW(play_mdi_round(0, 0, rng, {1.5}), std::domain_error);
}

// ---------- estimation ----------

TEST(Protocol, EstimateHandBuiltRecords) {
  std::vector<RoundRecord> rec(4);
  // two kept MDI rounds, one with a Type1 error (equal bits)
  rec[0].kept = true;
  rec[0].event_type = EventType::type1;
  rec[0].bit_alice = 0;
  rec[0].bit_bob = 1;
  rec[1].kept = true;
  rec[1].event_type = EventType::type1;
  rec[1].bit_alice = 1;
  rec[1].bit_bob = 1;
  const McSummary s = estimate(rec);
  EXPECT_EQ(s.rounds_total, 4);
  EXPECT_EQ(s.rounds_kept, 2);
  EXPECT_NEAR(s.sift_rate, 0.5, 1e-15);
  EXPECT_NEAR(s.qber, 0.5, 1e-15);
  EXPECT_NEAR(s.stderr_qber, std::sqrt(0.25 / 2.0), 1e-15);
}

TEST(Protocol, EstimateEntanglementRecordsUseAgreement) {
  // no event_type: plain disagreement counts as error
  std::vector<RoundRecord> rec(2);
  rec[0].kept = true;
  rec[0].bit_alice = 0;
  rec[0].bit_bob = 0;
  rec[1].kept = true;
  rec[1].bit_alice = 0;
  rec[1].bit_bob = 1;
  const McSummary s = estimate(rec);
  EXPECT_NEAR(s.qber, 0.5, 1e-15);
}

TEST(Protocol, EstimateRejectsEmptyInput) {
  EXPECT_THROW(estimate({}), std::domain_error);
}

TEST(Protocol, EstimateWithNothingKeptLeavesQberUndefined) {
  std::vector<RoundRecord> records(10);  // default records are not kept
  const McSummary s = estimate(records);
  EXPECT_EQ(s.rounds_total, 10);
  EXPECT_EQ(s.rounds_kept, 0);
  EXPECT_EQ(s.sift_rate, 0.0);
  EXPECT_TRUE(std::isnan(s.qber));
  EXPECT_TRUE(std::isnan(s.stderr_qber));
}

// ---------- RNG ----------

TEST(Protocol, RngBasics) {
  Rng rng(123);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  std::array<int, 4> seen{};
  for (int i = 0; i < 1000; ++i) seen[rng.uniform_int(4)]++;
  for (int c : seen) EXPECT_GT(c, 0);
}

TEST(Protocol, RoundStreamsAreStable) {
  // same (seed, index) gives the same stream; adjacent indices differ
  EXPECT_EQ(round_rng(1, 7).uniform(), round_rng(1, 7).uniform());
  EXPECT_NE(round_rng(1, 7).uniform(), round_rng(1, 8).uniform());
  EXPECT_NE(round_rng(1, 7).uniform(), round_rng(2, 7).uniform());
}
