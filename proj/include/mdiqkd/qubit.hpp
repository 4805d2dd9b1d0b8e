#pragma once

// Exact two-level algebra for the SARG04 protocol operators: the pi/2
// Y-rotation R, the three twirl rotations T_l, the local filter F, and
// Bell-basis projection of a qubit pair.
//
// Conventions: the computational basis is the Z eigenbasis; horizontal
// photon polarization maps to |0_z> and vertical to |1_z>;
// |0_x> = (|0_z> + |1_z>)/sqrt(2).  States may be sub-normalized, in
// which case the squared norm carries the success probability of the
// operation that produced them; global phases are never silently
// normalized away.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mdiqkd {

using cplx = std::complex<double>;

inline constexpr double kTol = 1e-12;

// Row-major 2x2 complex matrix.
struct Operator2 {
  std::array<cplx, 4> m{};

  cplx operator()(int r, int c) const { return m[2 * r + c]; }
  cplx& operator()(int r, int c) { return m[2 * r + c]; }
};

inline Operator2 identity2() { return {{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}}}; }
inline Operator2 pauli_x() { return {{cplx{0, 0}, cplx{1, 0}, cplx{1, 0}, cplx{0, 0}}}; }
inline Operator2 pauli_y() { return {{cplx{0, 0}, cplx{0, -1}, cplx{0, 1}, cplx{0, 0}}}; }
inline Operator2 pauli_z() { return {{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{-1, 0}}}; }

inline Operator2 mul(const Operator2& a, const Operator2& b) {
  Operator2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
  return r;
}

inline Operator2 adjoint(const Operator2& a) {
  Operator2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = std::conj(a(j, i));
  return r;
}

inline Operator2 scale(cplx s, const Operator2& a) {
  Operator2 r = a;
  for (auto& v : r.m) v *= s;
  return r;
}

inline Operator2 add(const Operator2& a, const Operator2& b) {
  Operator2 r;
  for (std::size_t i = 0; i < 4; ++i) r.m[i] = a.m[i] + b.m[i];
  return r;
}

inline bool approx_unitary(const Operator2& a, double tol = kTol) {
  Operator2 p = mul(adjoint(a), a);
  Operator2 id = identity2();
  for (std::size_t i = 0; i < 4; ++i)
    if (std::abs(p.m[i] - id.m[i]) > tol) return false;
  return true;
}

// State vector of one qubit (length 2) or a qubit pair (length 4).
// Pair amplitudes are ordered |ab> -> index 2a + b, first factor = qubit 0.
class StateVec {
 public:
  explicit StateVec(std::vector<cplx> amps) : a_(std::move(amps)) {
    if (a_.size() != 2 && a_.size() != 4)
      throw std::invalid_argument("StateVec: length must be 2 or 4");
  }

  std::size_t size() const { return a_.size(); }
  cplx operator[](std::size_t i) const { return a_[i]; }
  cplx& operator[](std::size_t i) { return a_[i]; }

  double norm2() const {
    double s = 0;
    for (const auto& v : a_) s += std::norm(v);
    return s;
  }

  StateVec normalized() const {
    double n = std::sqrt(norm2());
    if (n <= 0) throw std::domain_error("StateVec: cannot normalize zero vector");
    StateVec r = *this;
    for (auto& v : r.a_) v /= n;
    return r;
  }

 private:
  std::vector<cplx> a_;
};

inline StateVec qubit(cplx a0, cplx a1) { return StateVec({a0, a1}); }

inline StateVec z0() { return qubit(1, 0); }
inline StateVec z1() { return qubit(0, 1); }
inline StateVec x0() { return qubit(std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2); }
inline StateVec x1() { return qubit(std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2); }

inline cplx inner(const StateVec& u, const StateVec& v) {
  if (u.size() != v.size()) throw std::invalid_argument("inner: size mismatch");
  cplx s{};
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

inline StateVec kron(const StateVec& u, const StateVec& v) {
  if (u.size() != 2 || v.size() != 2)
    throw std::invalid_argument("kron: expects two single-qubit states");
  return StateVec({u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]});
}

inline StateVec apply(const Operator2& op, const StateVec& s) {
  if (s.size() != 2) throw std::invalid_argument("apply: expects a single-qubit state");
  return qubit(op(0, 0) * s[0] + op(0, 1) * s[1], op(1, 0) * s[0] + op(1, 1) * s[1]);
}

// Applies op to one factor of a pair state (qubit 0 = first tensor factor).
inline StateVec apply_on(const Operator2& op, int which, const StateVec& s) {
  if (s.size() != 4) throw std::invalid_argument("apply_on: expects a pair state");
  if (which != 0 && which != 1) throw std::invalid_argument("apply_on: which must be 0 or 1");
  std::vector<cplx> r(4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      if (which == 0)
        r[2 * a + b] = op(a, 0) * s[0 * 2 + b] + op(a, 1) * s[1 * 2 + b];
      else
        r[2 * a + b] = op(b, 0) * s[2 * a + 0] + op(b, 1) * s[2 * a + 1];
    }
  return StateVec(std::move(r));
}

// R = cos(pi/4) I - i sin(pi/4) sigma_Y, the pi/2 rotation about Y; as a
// matrix it is the real plane rotation by pi/4, so R^4 = -I.
inline Operator2 rotation_R(int k) {
  if (k < 0 || k > 3) throw std::domain_error("rotation_R: k must be in 0..3");
  const double t = k * std::numbers::pi / 4.0;
  const double c = std::cos(t), s = std::sin(t);
  return {{cplx{c, 0}, cplx{-s, 0}, cplx{s, 0}, cplx{c, 0}}};
}

// T_0 = I, T_l = cos(pi/4) I - i sin(pi/4) (sigma_Z +- sigma_X)/sqrt(2).
inline Operator2 rotation_T(int l) {
  if (l < 0 || l > 2) throw std::domain_error("rotation_T: l must be in 0..2");
  if (l == 0) return identity2();
  const double c = std::cos(std::numbers::pi / 4.0);
  const double s = std::sin(std::numbers::pi / 4.0);
  const double sign = (l == 1) ? 1.0 : -1.0;
  Operator2 axis = add(pauli_z(), scale(cplx{sign, 0}, pauli_x()));
  axis = scale(cplx{1.0 / std::numbers::sqrt2, 0}, axis);
  return add(scale(cplx{c, 0}, identity2()), scale(cplx{0, -s}, axis));
}

// F = sin(pi/8)|0_x><0_x| + cos(pi/8)|1_x><1_x|: Hermitian, positive,
// eigenvalues sin(pi/8) and cos(pi/8).
inline Operator2 filter_op() {
  const double s = std::sin(std::numbers::pi / 8.0);
  const double c = std::cos(std::numbers::pi / 8.0);
  return {{cplx{(s + c) / 2, 0}, cplx{(s - c) / 2, 0}, cplx{(s - c) / 2, 0},
           cplx{(s + c) / 2, 0}}};
}

// Complement of the filter: sqrt(I - F^dag F) = cos(pi/8)|0_x><0_x| +
// sin(pi/8)|1_x><1_x|.  Applied to the failure branch.
inline Operator2 filter_fail_op() {
  const double s = std::sin(std::numbers::pi / 8.0);
  const double c = std::cos(std::numbers::pi / 8.0);
  return {{cplx{(c + s) / 2, 0}, cplx{(c - s) / 2, 0}, cplx{(c - s) / 2, 0},
           cplx{(c + s) / 2, 0}}};
}

struct FilterResult {
  double success_prob;
  StateVec post;  // renormalized success branch
};

inline FilterResult filter_apply(const StateVec& s) {
  if (s.size() != 2) throw std::invalid_argument("filter_apply: expects a single-qubit state");
  if (s.norm2() <= 0) throw std::domain_error("filter_apply: zero-norm input");
  StateVec f = apply(filter_op(), s);
  double p = f.norm2() / s.norm2();
  return {p, f.normalized()};
}

enum class BellOutcome { psi_plus = 0, psi_minus = 1, phi_plus = 2, phi_minus = 3 };

inline const char* to_string(BellOutcome b) {
  switch (b) {
    case BellOutcome::psi_plus: return "psi+";
    case BellOutcome::psi_minus: return "psi-";
    case BellOutcome::phi_plus: return "phi+";
    case BellOutcome::phi_minus: return "phi-";
  }
  return "?";
}

inline StateVec bell_state(BellOutcome b) {
  const double r = std::numbers::sqrt2 / 2;
  switch (b) {
    case BellOutcome::psi_plus: return StateVec({0, r, r, 0});
    case BellOutcome::psi_minus: return StateVec({0, r, -r, 0});
    case BellOutcome::phi_plus: return StateVec({r, 0, 0, r});
    case BellOutcome::phi_minus: return StateVec({r, 0, 0, -r});
  }
  throw std::invalid_argument("bell_state: bad outcome");
}

// Projection probabilities of a normalized pair state onto the Bell basis,
// indexed by BellOutcome.  Invariant under a global phase of the input.
inline std::array<double, 4> bell_project(const StateVec& s) {
  if (s.size() != 4) throw std::invalid_argument("bell_project: expects a pair state");
  std::array<double, 4> p{};
  for (int i = 0; i < 4; ++i)
    p[i] = std::norm(inner(bell_state(static_cast<BellOutcome>(i)), s));
  return p;
}

// Z measurement of one qubit: returns 0 when draw < |amp0|^2.
inline int measure_z(const StateVec& s, double draw) {
  if (s.size() != 2) throw std::invalid_argument("measure_z: expects a single-qubit state");
  double n = s.norm2();
  if (n <= 0) throw std::domain_error("measure_z: zero-norm input");
  return draw < std::norm(s[0]) / n ? 0 : 1;
}

// Joint Z measurement of a pair state; one draw selects the |ab> cell.
inline std::pair<int, int> measure_z_pair(const StateVec& s, double draw) {
  if (s.size() != 4) throw std::invalid_argument("measure_z_pair: expects a pair state");
  double n = s.norm2();
  if (n <= 0) throw std::domain_error("measure_z_pair: zero-norm input");
  double acc = 0;
  for (int i = 0; i < 4; ++i) {
    acc += std::norm(s[i]) / n;
    if (draw < acc || i == 3) return {i >> 1, i & 1};
  }
  return {1, 1};
}

}  // namespace mdiqkd
