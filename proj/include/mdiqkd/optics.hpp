#pragma once

// Photon-number-resolved model of the relay's linear-optics Bell station:
// a 50:50 beam splitter followed by one +45/-45deg polarizing splitter and
// two threshold detectors per output port (AT, AR on the port aligned with
// Alice's side; BT, BR on Bob's).  Pulses enter as Fock states of m and n
// photons in fixed linear polarizations; detector inefficiency and channel
// loss are folded into a single per-photon survival probability, and each
// detector fires spuriously with dark probability d per window.
//
// A success is exactly the named coincidence pair with the other two
// detectors silent: Type1 = {AT,BR} or {BT,AR}, Type2 = {AT,AR} or {BT,BR}.
// Any pattern outside those four is discarded.
//
// The input creation operator at polarization angle theta maps to the four
// detector modes linearly; expanding the m+n-fold product over the
// occupation lattice gives exact Fock amplitudes, so two-photon
// interference (in particular Hong-Ou-Mandel bunching, which removes
// cross-port coincidences for indistinguishable photons) is automatic.
// Loss commutes with the passive optics and is applied at the detectors as
// binomial thinning: a detector with nu arriving photons stays silent with
// probability (1-d)(1-p)^nu.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdiqkd/channel.hpp"
#include "mdiqkd/params.hpp"
#include "mdiqkd/protocol.hpp"

namespace mdiqkd {

enum class DetectorId { at = 0, ar = 1, bt = 2, br = 3 };

// Bit mask over the four detectors, bit i = detector i clicked.
struct ClickPattern {
  unsigned mask = 0;

  bool contains(DetectorId d) const { return mask >> static_cast<int>(d) & 1u; }
  int count() const { return std::popcount(mask); }
};

inline constexpr unsigned kMaskAT = 1u << 0;
inline constexpr unsigned kMaskAR = 1u << 1;
inline constexpr unsigned kMaskBT = 1u << 2;
inline constexpr unsigned kMaskBR = 1u << 3;

inline constexpr std::array<unsigned, 2> kType1Masks = {kMaskAT | kMaskBR, kMaskBT | kMaskAR};
inline constexpr std::array<unsigned, 2> kType2Masks = {kMaskAT | kMaskAR, kMaskBT | kMaskBR};

inline const std::array<unsigned, 2>& success_masks(EventType t) {
  return t == EventType::type1 ? kType1Masks : kType2Masks;
}

// Polarization sent for rotation index k and bit b: R^k applied to the
// horizontal reference, i.e. angle k pi/4 + b pi/2 (same convention as the
// protocol layer, so yields can be cross-checked against bell_project).
inline double pol_angle(int k, int bit) {
  return k * std::numbers::pi / 4.0 + bit * std::numbers::pi / 2.0;
}

inline constexpr int kExpansionLimit = 64;  // max m+n the expansion accepts

namespace detail {

inline const std::array<double, kExpansionLimit + 1>& factorials() {
  static const auto table = [] {
    std::array<double, kExpansionLimit + 1> f{};
    f[0] = 1.0;
    for (int i = 1; i <= kExpansionLimit; ++i) f[i] = f[i - 1] * i;
    return f;
  }();
  return table;
}

inline double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// Detector-mode coefficients (AT, AR, BT, BR) of one input photon.  The
// beam splitter sends Alice's mode to (A + B)/sqrt2 and Bob's to
// (A - B)/sqrt2; the polarizing splitter projects onto +-45deg.
inline std::array<double, 4> alice_coeffs(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {(c + s) / 2, (c - s) / 2, (c + s) / 2, (c - s) / 2};
}

inline std::array<double, 4> bob_coeffs(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {(c + s) / 2, (c - s) / 2, -(c + s) / 2, -(c - s) / 2};
}

struct FockTerm {
  std::array<int, 4> occ;
  double amp;
};

// Exact Fock amplitudes over the four detector modes of
// (sum u_j D_j^+)^m (sum v_j D_j^+)^n |0> / sqrt(m! n!).
// Every occupation with total m+n is emitted, in a fixed lexicographic
// order shared by all inputs of the same (m, n).
inline std::vector<FockTerm> fock_amplitudes(const std::array<double, 4>& u, int m,
                                             const std::array<double, 4>& v, int n) {
  if (m < 0 || n < 0) throw std::domain_error("fock_amplitudes: negative photon number");
  if (m + n > kExpansionLimit)
    throw std::length_error("fock_amplitudes: m+n above expansion limit");
  const auto& fact = factorials();
  const int total = m + n;
  std::vector<FockTerm> terms;
  terms.reserve((total + 1) * (total + 2) * (total + 3) / 6);
  for (int n0 = 0; n0 <= total; ++n0)
    for (int n1 = 0; n1 <= total - n0; ++n1)
      for (int n2 = 0; n2 <= total - n0 - n1; ++n2) {
        const int n3 = total - n0 - n1 - n2;
        const std::array<int, 4> occ{n0, n1, n2, n3};
        double s = 0.0;
        // split occ into a (Alice, |a| = m) + b (Bob, |b| = n)
        const int a0_lo = std::max(0, m - n1 - n2 - n3), a0_hi = std::min(n0, m);
        for (int a0 = a0_lo; a0 <= a0_hi; ++a0) {
          const int a1_lo = std::max(0, m - a0 - n2 - n3), a1_hi = std::min(n1, m - a0);
          for (int a1 = a1_lo; a1 <= a1_hi; ++a1) {
            const int a2_lo = std::max(0, m - a0 - a1 - n3),
                      a2_hi = std::min(n2, m - a0 - a1);
            for (int a2 = a2_lo; a2 <= a2_hi; ++a2) {
              const int a3 = m - a0 - a1 - a2;
              const double mult_a = fact[m] / (fact[a0] * fact[a1] * fact[a2] * fact[a3]);
              const double mult_b = fact[n] / (fact[n0 - a0] * fact[n1 - a1] *
                                               fact[n2 - a2] * fact[n3 - a3]);
              s += mult_a * mult_b * ipow(u[0], a0) * ipow(u[1], a1) * ipow(u[2], a2) *
                   ipow(u[3], a3) * ipow(v[0], n0 - a0) * ipow(v[1], n1 - a1) *
                   ipow(v[2], n2 - a2) * ipow(v[3], n3 - a3);
            }
          }
        }
        const double norm = std::sqrt(fact[n0] * fact[n1] * fact[n2] * fact[n3]) /
                            std::sqrt(fact[m] * fact[n]);
        terms.push_back({occ, s * norm});
      }
  return terms;
}

// Moebius inversion: probability that the silent set is exactly V, from
// superset-silent probabilities psup[T] = P(all detectors in T silent).
inline double exact_silent(const std::array<double, 16>& psup, unsigned V) {
  const unsigned rest = ~V & 0xFu;
  double s = 0.0;
  unsigned W = rest;
  while (true) {
    s += (std::popcount(W) & 1 ? -1.0 : 1.0) * psup[V | W];
    if (W == 0) break;
    W = (W - 1) & rest;
  }
  return std::max(s, 0.0);
}

// Silent-subset polynomials: g[T] holds coefficients over t of
// sum_N w_N x^{N_T}, where N_T is the photon count landing in subset T and
// w_N is |alpha_N|^2 (classical) or alpha_N alpha'_N (branch coherences).
using SilentPolys = std::array<std::vector<double>, 16>;

inline SilentPolys silent_polys(const std::vector<FockTerm>& ket,
                                const std::vector<FockTerm>& bra, int total) {
  SilentPolys g;
  for (auto& gi : g) gi.assign(total + 1, 0.0);
  for (std::size_t i = 0; i < ket.size(); ++i) {
    const double w = ket[i].amp * bra[i].amp;
    if (w == 0.0) continue;
    const auto& occ = ket[i].occ;
    for (unsigned T = 0; T < 16; ++T) {
      int t = 0;
      for (int j = 0; j < 4; ++j)
        if (T >> j & 1u) t += occ[j];
      g[T][t] += w;
    }
  }
  return g;
}

inline double polyval(const std::vector<double>& c, double x) {
  double r = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
  return r;
}

// psup[T] = (1-d)^|T| * g_T(1-p): all detectors in T silent.
inline std::array<double, 16> superset_silent(const SilentPolys& g, double p_survive,
                                              double dark) {
  std::array<double, 5> pow1d{};
  pow1d[0] = 1.0;
  for (int i = 1; i <= 4; ++i) pow1d[i] = pow1d[i - 1] * (1.0 - dark);
  std::array<double, 16> psup{};
  for (unsigned T = 0; T < 16; ++T)
    psup[T] = pow1d[std::popcount(T)] * polyval(g[T], 1.0 - p_survive);
  return psup;
}

inline void check_probs(double p_survive, double dark) {
  if (!(p_survive >= 0.0 && p_survive <= 1.0))
    throw std::domain_error("optics: p_survive must be in [0,1]");
  if (!(dark >= 0.0 && dark < 1.0)) throw std::domain_error("optics: dark must be in [0,1)");
}

}  // namespace detail

// Exact click-pattern distribution for m photons at pol_a meeting n photons
// at pol_b, indexed by pattern mask; sums to 1.
inline std::array<double, 16> click_distribution(int m, int n, double pol_a, double pol_b,
                                                 double p_survive, double dark) {
  detail::check_probs(p_survive, dark);
  const auto terms =
      detail::fock_amplitudes(detail::alice_coeffs(pol_a), m, detail::bob_coeffs(pol_b), n);
  const auto g = detail::silent_polys(terms, terms, m + n);
  const auto psup = detail::superset_silent(g, p_survive, dark);
  std::array<double, 16> dist{};
  for (unsigned S = 0; S < 16; ++S) dist[S] = detail::exact_silent(psup, ~S & 0xFu);
  return dist;
}

// ---------- per-cell yields ----------

struct YieldCell {
  double Q = 0.0;
  double e_b = 0.0;
  std::optional<double> e_p;
};

// Unnormalized post-selected two-qubit state of the virtual bit qubits, as
// a real symmetric 4x4 matrix over (bit_a, bit_b) with index 2*bit_a+bit_b.
// Returns the probability that X-basis outcomes agree (the ideal kept
// states psi- and phi- are X-anticorrelated), clamped to [0, 1/2].
inline double phase_error_from_state(const std::array<double, 16>& rho) {
  const double tr = rho[0] + rho[5] + rho[10] + rho[15];
  if (!(tr > 0.0)) return 0.5;  // no kept mass: maximally uncertain
  const std::array<double, 4> vpp{0.5, 0.5, 0.5, 0.5};    // |x+ x+>
  const std::array<double, 4> vmm{0.5, -0.5, -0.5, 0.5};  // |x- x->
  double agree = 0.0;
  for (const auto& v : {vpp, vmm})
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) agree += v[i] * rho[4 * i + j] * v[j];
  return std::clamp(agree / tr, 0.0, 0.5);
}

namespace detail {

// geometry of one (m, n) cell: silent polynomials per (k_a, bit_a, k_b, bit_b)
struct CellGeom {
  int m = 0, n = 0;
  std::array<SilentPolys, 64> combo;  // index ((k_a*2+bit_a)*4+k_b)*2+bit_b
};

inline int combo_index(int ka, int ba, int kb, int bb) {
  return ((ka * 2 + ba) * 4 + kb) * 2 + bb;
}

inline CellGeom cell_geometry(int m, int n) {
  CellGeom cg;
  cg.m = m;
  cg.n = n;
  for (int ka = 0; ka < 4; ++ka)
    for (int ba = 0; ba < 2; ++ba) {
      const auto u = alice_coeffs(pol_angle(ka, ba));
      for (int kb = 0; kb < 4; ++kb)
        for (int bb = 0; bb < 2; ++bb) {
          const auto v = bob_coeffs(pol_angle(kb, bb));
          const auto terms = fock_amplitudes(u, m, v, n);
          cg.combo[combo_index(ka, ba, kb, bb)] = silent_polys(terms, terms, m + n);
        }
    }
  return cg;
}

// yield part (before source photon-number weights) and bit-error fraction
struct CellYield {
  double y = 0.0;
  double e_b = 0.0;
};

inline CellYield cell_yield(const CellGeom& cg, EventType type, double p_survive,
                            double dark) {
  check_probs(p_survive, dark);
  const auto& masks = success_masks(type);
  double y = 0.0, err = 0.0;
  for (int ka = 0; ka < 4; ++ka)
    for (int kb = 0; kb < 4; ++kb) {
      if (!mdi_keep(type, ka, kb)) continue;
      for (int ba = 0; ba < 2; ++ba)
        for (int bb = 0; bb < 2; ++bb) {
          const auto psup =
              superset_silent(cg.combo[combo_index(ka, ba, kb, bb)], p_survive, dark);
          double p = 0.0;
          for (unsigned S : masks) p += exact_silent(psup, ~S & 0xFu);
          y += p / 64.0;
          if (bit_error(type, ba, bb)) err += p / 64.0;
        }
    }
  return {y, y > 0.0 ? err / y : 0.0};
}

// branch-coherence geometry of one (m, n) cell at matched k: silent
// polynomials for every ket/bra pair of bit branches
struct PairGeom {
  // pair[bb][cc] with bb = 2*bit_a+bit_b of the ket branch, cc of the bra
  std::array<std::array<SilentPolys, 4>, 4> pair;
};

inline PairGeom pair_geometry(int m, int n, int k) {
  std::array<std::vector<FockTerm>, 4> branch;
  for (int ba = 0; ba < 2; ++ba)
    for (int bb = 0; bb < 2; ++bb)
      branch[2 * ba + bb] = fock_amplitudes(alice_coeffs(pol_angle(k, ba)), m,
                                            bob_coeffs(pol_angle(k, bb)), n);
  PairGeom pg;
  for (int bb = 0; bb < 4; ++bb)
    for (int cc = 0; cc < 4; ++cc)
      pg.pair[bb][cc] = silent_polys(branch[bb], branch[cc], m + n);
  return pg;
}

inline bool phase_error_cell(int m, int n) {
  return (m == 1 && n == 1) || (m == 1 && n == 2) || (m == 2 && n == 1);
}

// unnormalized post-selected virtual state accumulated over the keep set
inline std::array<double, 16> post_selected_state(const std::array<PairGeom, 4>& by_k,
                                                  EventType type, double p_survive,
                                                  double dark) {
  check_probs(p_survive, dark);
  const auto& masks = success_masks(type);
  std::array<double, 16> rho{};
  for (int k = 0; k < 4; ++k) {
    if (!mdi_keep(type, k, k)) continue;
    const auto& pg = by_k[k];
    for (int bb = 0; bb < 4; ++bb)
      for (int cc = 0; cc < 4; ++cc) {
        const auto psup = superset_silent(pg.pair[bb][cc], p_survive, dark);
        double msum = 0.0;
        for (unsigned S : masks) {
          // signed coherences: skip the clamp used for classical patterns
          const unsigned V = ~S & 0xFu;
          const unsigned rest = S;
          unsigned W = rest;
          while (true) {
            msum += (std::popcount(W) & 1 ? -1.0 : 1.0) * psup[V | W];
            if (W == 0) break;
            W = (W - 1) & rest;
          }
        }
        rho[4 * bb + cc] += msum / 64.0;  // 1/16 per (k,k') times 1/4 per branch pair
      }
  }
  return rho;
}

}  // namespace detail

// Q (joint probability of emitting (m, n) photons and announcing a kept
// Type event) and the conditional bit-error fraction of those events.
inline std::pair<double, double> yields_and_bit_error(EventType type, int m, int n,
                                                      const ExperimentParams& params,
                                                      double L_km) {
  params.validate();
  const double p = params.eta * transmittance(L_km, params.alpha);
  const auto cy = detail::cell_yield(detail::cell_geometry(m, n), type, p, params.dark);
  const double q = poisson_weight(params.mu_a, m) * poisson_weight(params.mu_b, n) * cy.y;
  return {q, cy.e_b};
}

// X-basis disagreement of the post-selected virtual state; defined for the
// privacy-amplified photon-number pairs (1,1), (1,2), (2,1) only.
inline double phase_error(EventType type, int m, int n, const ExperimentParams& params,
                          double L_km) {
  if (!detail::phase_error_cell(m, n))
    throw std::domain_error("phase_error: defined only for (1,1), (1,2), (2,1)");
  params.validate();
  const double p = params.eta * transmittance(L_km, params.alpha);
  std::array<detail::PairGeom, 4> by_k;
  for (int k = 0; k < 4; ++k) by_k[k] = detail::pair_geometry(m, n, k);
  return phase_error_from_state(detail::post_selected_state(by_k, type, p, params.dark));
}

// ---------- yield table ----------

struct YieldTable {
  int n_max = 0;
  double L_km = 0.0;
  ExperimentParams params;
  std::string params_hash;
  std::vector<YieldCell> cells;  // [type][m][n] flattened

  static YieldTable zeroed(const ExperimentParams& params, double L_km, int n_max) {
    YieldTable t;
    t.n_max = n_max;
    t.L_km = L_km;
    t.params = params;
    t.cells.assign(2 * (n_max + 1) * (n_max + 1), YieldCell{});
    return t;
  }

  std::size_t index(EventType t, int m, int n) const {
    if (m < 0 || n < 0 || m > n_max || n > n_max)
      throw std::out_of_range("YieldTable: (m,n) outside table");
    const int ti = t == EventType::type1 ? 0 : 1;
    return static_cast<std::size_t>((ti * (n_max + 1) + m) * (n_max + 1) + n);
  }

  const YieldCell& at(EventType t, int m, int n) const { return cells[index(t, m, n)]; }
  YieldCell& at(EventType t, int m, int n) { return cells[index(t, m, n)]; }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string params_line(const ExperimentParams& p, double L_km, int n_max) {
  std::string s;
  s += "eta=" + format_double(p.eta);
  s += " dark=" + format_double(p.dark);
  s += " alpha=" + format_double(p.alpha);
  s += " mu_a=" + format_double(p.mu_a);
  s += " mu_b=" + format_double(p.mu_b);
  s += " fe=" + (p.fe.kind == FeMode::Kind::enzer_cubic
                     ? std::string("enzer")
                     : "fixed:" + format_double(p.fe.value));
  s += " n_max=" + std::to_string(n_max);
  s += " L_km=" + format_double(L_km);
  return s;
}

}  // namespace detail

// Precomputes the L-independent geometry once so tables at many distances
// (or many source intensities) are cheap.  Pure and safe to share.
class OpticsModel {
 public:
  explicit OpticsModel(int n_max) : n_max_(n_max) {
    if (n_max < 2) throw std::domain_error("OpticsModel: n_max must be >= 2");
    cells_.reserve((n_max + 1) * (n_max + 1));
    for (int m = 0; m <= n_max; ++m)
      for (int n = 0; n <= n_max; ++n) cells_.push_back(detail::cell_geometry(m, n));
    for (auto cell : {std::pair{1, 1}, std::pair{1, 2}, std::pair{2, 1}}) {
      auto& by_k = pair_cells_.emplace_back();
      for (int k = 0; k < 4; ++k)
        by_k[k] = detail::pair_geometry(cell.first, cell.second, k);
    }
  }

  int n_max() const { return n_max_; }

  detail::CellYield cell_yield(EventType type, int m, int n, double p_survive,
                               double dark) const {
    return detail::cell_yield(cells_[(n_max_ + 1) * m + n], type, p_survive, dark);
  }

  double cell_phase_error(EventType type, int m, int n, double p_survive,
                          double dark) const {
    if (!detail::phase_error_cell(m, n))
      throw std::domain_error("phase_error: defined only for (1,1), (1,2), (2,1)");
    const int idx = (m == 1 && n == 1) ? 0 : (m == 1 ? 1 : 2);
    return phase_error_from_state(
        detail::post_selected_state(pair_cells_[idx], type, p_survive, dark));
  }

  YieldTable table(const ExperimentParams& params, double L_km) const {
    params.validate();
    if (params.n_max != n_max_)
      throw std::invalid_argument("OpticsModel::table: params.n_max mismatch");
    const double p = params.eta * transmittance(L_km, params.alpha);
    YieldTable t = YieldTable::zeroed(params, L_km, n_max_);
    for (EventType type : {EventType::type1, EventType::type2})
      for (int m = 0; m <= n_max_; ++m)
        for (int n = 0; n <= n_max_; ++n) {
          const auto cy = cell_yield(type, m, n, p, params.dark);
          YieldCell& cell = t.at(type, m, n);
          cell.Q = poisson_weight(params.mu_a, m) * poisson_weight(params.mu_b, n) * cy.y;
          cell.e_b = cy.e_b;
          if (detail::phase_error_cell(m, n))
            cell.e_p = cell_phase_error(type, m, n, p, params.dark);
        }
    t.params_hash = detail::fnv1a_hex(detail::params_line(params, L_km, n_max_));
    return t;
  }

 private:
  int n_max_;
  std::vector<detail::CellGeom> cells_;
  std::vector<std::array<detail::PairGeom, 4>> pair_cells_;
};

inline YieldTable build_yield_table(const ExperimentParams& params, double L_km,
                                    int n_max) {
  if (n_max < 2) throw std::domain_error("build_yield_table: n_max must be >= 2");
  ExperimentParams p = params;
  p.n_max = n_max;
  return OpticsModel(n_max).table(p, L_km);
}

// ---------- serialization ----------

inline constexpr const char* kYieldTableVersion = "mdiqkd yield-table v1";

inline std::string serialize(const YieldTable& t) {
  std::string out;
  out += std::string("# ") + kYieldTableVersion + "\n";
  out += "# " + detail::params_line(t.params, t.L_km, t.n_max) + "\n";
  out += "# params_hash=" + t.params_hash + "\n";
  out += "# columns: type m n Q e_b e_p\n";
  for (EventType type : {EventType::type1, EventType::type2})
    for (int m = 0; m <= t.n_max; ++m)
      for (int n = 0; n <= t.n_max; ++n) {
        const YieldCell& c = t.at(type, m, n);
        out += std::string(to_string(type)) + " " + std::to_string(m) + " " +
               std::to_string(n) + " " + detail::format_double(c.Q) + " " +
               detail::format_double(c.e_b) + " " +
               (c.e_p ? detail::format_double(*c.e_p) : "-") + "\n";
      }
  return out;
}

inline YieldTable parse_yield_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != std::string("# ") + kYieldTableVersion)
    throw std::runtime_error("parse_yield_table: missing or unknown version line");
  if (!std::getline(in, line) || line.rfind("# eta=", 0) != 0)
    throw std::runtime_error("parse_yield_table: missing params line");

  ExperimentParams params;
  double L_km = 0.0;
  int n_max = 0;
  {
    std::istringstream ps(line.substr(2));
    std::string tok;
    while (ps >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("parse_yield_table: bad params token " + tok);
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "eta") params.eta = std::stod(val);
      else if (key == "dark") params.dark = std::stod(val);
      else if (key == "alpha") params.alpha = std::stod(val);
      else if (key == "mu_a") params.mu_a = std::stod(val);
      else if (key == "mu_b") params.mu_b = std::stod(val);
      else if (key == "fe")
        params.fe = val == "enzer" ? FeMode::enzer() : FeMode::fixed(std::stod(val.substr(6)));
      else if (key == "n_max") n_max = std::stoi(val);
      else if (key == "L_km") L_km = std::stod(val);
      else throw std::runtime_error("parse_yield_table: unknown key " + key);
    }
  }
  params.n_max = n_max;
  YieldTable t = YieldTable::zeroed(params, L_km, n_max);

  if (!std::getline(in, line) || line.rfind("# params_hash=", 0) != 0)
    throw std::runtime_error("parse_yield_table: missing params_hash line");
  t.params_hash = line.substr(14);
  if (!std::getline(in, line) || line.rfind("# columns:", 0) != 0)
    throw std::runtime_error("parse_yield_table: missing columns line");

  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    int ti, m, n;
    std::string q, eb, ep;
    if (!(row >> ti >> m >> n >> q >> eb >> ep))
      throw std::runtime_error("parse_yield_table: bad row: " + line);
    const EventType type = ti == 1 ? EventType::type1 : EventType::type2;
    YieldCell& c = t.at(type, m, n);
    c.Q = std::stod(q);
    c.e_b = std::stod(eb);
    if (ep != "-") c.e_p = std::stod(ep);
    ++rows;
  }
  if (rows != 2 * (n_max + 1) * (n_max + 1))
    throw std::runtime_error("parse_yield_table: row count mismatch");
  return t;
}

}  // namespace mdiqkd
