// gates.hpp: fixed unitaries (gates, subsystem permutations, one-way fixture)
// and the causal-switch constructor

#pragma once

#include "qci/linalg.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace qci {

enum class GateName {
  kCnot,      // control A, target B
  kCz,
  kSwap,
  kHadamard,  // H on A, identity on B
  kToffoli,   // controls A, B; target C
  kFredkin,   // control A; swaps B, C
  kPerm123,   // |i k m> -> |m i k>
  kPerm132,   // |i k m> -> |k m i>
  kSmb,       // 8x8 unitary with one-way influence A -> B
  kIdentity,
};

inline constexpr std::array<std::pair<GateName, std::string_view>, 10> kGateNames{{
    {GateName::kCnot, "cnot"},
    {GateName::kCz, "cz"},
    {GateName::kSwap, "swap"},
    {GateName::kHadamard, "hadamard"},
    {GateName::kToffoli, "toffoli"},
    {GateName::kFredkin, "fredkin"},
    {GateName::kPerm123, "perm123"},
    {GateName::kPerm132, "perm132"},
    {GateName::kSmb, "smb"},
    {GateName::kIdentity, "identity"},
}};

inline std::optional<GateName> parse_gate_name(std::string_view s) {
  for (const auto& [g, name] : kGateNames)
    if (name == s) return g;
  return std::nullopt;
}

inline std::string_view to_string(GateName g) {
  for (const auto& [h, name] : kGateNames)
    if (h == g) return name;
  return "?";
}

struct GateSpec {
  GateName name;
  Dims dims;                       // full subsystem list, environment last when present
  std::vector<double> parameters;  // unused by the fixed catalog
};

/// Unitary that maps basis ket |digits> to |f(digits)>; f must be a bijection.
inline UnitaryMatrix permutation_unitary(const Dims& dims, const std::function<Dims(const Dims&)>& f) {
  const std::size_t n = product(dims);
  const Dims st = strides(dims);
  ComplexMatrix u = ComplexMatrix::Zero(n, n);
  Dims digits(dims.size());
  for (std::size_t in = 0; in < n; ++in) {
    std::size_t rem = in;
    for (std::size_t s = 0; s < dims.size(); ++s) {
      digits[s] = rem / st[s];
      rem %= st[s];
    }
    const Dims out_digits = f(digits);
    std::size_t out = 0;
    for (std::size_t s = 0; s < dims.size(); ++s) out += out_digits[s] * st[s];
    u(out, in) = 1.0;
  }
  return UnitaryMatrix(std::move(u));
}

/// CNOT between two qubit subsystems of an arbitrary register.
inline UnitaryMatrix cnot_between(const Dims& dims, std::size_t control, std::size_t target) {
  if (control >= dims.size() || target >= dims.size() || control == target)
    throw std::invalid_argument("cnot_between: bad control/target");
  if (dims[control] != 2 || dims[target] != 2)
    throw std::invalid_argument("cnot_between: control and target must be qubits");
  return permutation_unitary(dims, [&](const Dims& d) {
    Dims o = d;
    if (d[control] == 1) o[target] ^= 1u;
    return o;
  });
}

namespace detail {

inline ComplexMatrix two_qubit_matrix(GateName g) {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  const double s = std::numbers::sqrt2 / 2.0;
  switch (g) {
    case GateName::kCnot:
      m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
      break;
    case GateName::kCz:
      m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
      m(3, 3) = -1.0;
      break;
    case GateName::kSwap:
      m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1.0;
      break;
    case GateName::kHadamard:
      m(0, 0) = m(1, 1) = m(0, 2) = m(1, 3) = m(2, 0) = m(3, 1) = s;
      m(2, 2) = m(3, 3) = -s;
      break;
    default:
      throw std::logic_error("not a two-qubit gate");
  }
  return m;
}

inline ComplexMatrix smb_fixture() {
  const double s = std::numbers::sqrt2 / 2.0;
  ComplexMatrix m = ComplexMatrix::Zero(8, 8);
  m(0, 0) = 1.0;
  m(1, 2) = 1.0;
  m(2, 4) = s;
  m(2, 5) = s;
  m(3, 6) = s;
  m(3, 7) = s;
  m(4, 4) = s;
  m(4, 5) = -s;
  m(5, 6) = s;
  m(5, 7) = -s;
  m(6, 1) = 1.0;
  m(7, 3) = 1.0;
  return m;
}

[[noreturn]] inline void dims_error(GateName g, const Dims& dims, std::string_view expected) {
  throw std::invalid_argument("gate " + std::string(to_string(g)) + " expects dims " + std::string(expected) +
                              ", got " + dims_label(dims));
}

}  // namespace detail

inline UnitaryMatrix gate(const GateSpec& spec) {
  const Dims& d = spec.dims;
  if (d.empty()) throw std::invalid_argument("gate: empty dims");
  for (auto x : d)
    if (x == 0) throw std::invalid_argument("gate: zero dimension");

  switch (spec.name) {
    case GateName::kCnot:
    case GateName::kCz:
    case GateName::kSwap:
    case GateName::kHadamard: {
      if (d.size() < 2 || d.size() > 3 || d[0] != 2 || d[1] != 2) detail::dims_error(spec.name, d, "[2,2] or [2,2,d_C]");
      const std::size_t env = d.size() == 3 ? d[2] : 1;
      return UnitaryMatrix(
          tensor({detail::two_qubit_matrix(spec.name), ComplexMatrix::Identity(env, env)}));
    }
    case GateName::kToffoli:
      if (d != Dims{2, 2, 2}) detail::dims_error(spec.name, d, "[2,2,2]");
      return permutation_unitary(d, [](const Dims& x) {
        Dims o = x;
        if (x[0] == 1 && x[1] == 1) o[2] ^= 1u;
        return o;
      });
    case GateName::kFredkin:
      if (d != Dims{2, 2, 2}) detail::dims_error(spec.name, d, "[2,2,2]");
      return permutation_unitary(d, [](const Dims& x) {
        return x[0] == 1 ? Dims{x[0], x[2], x[1]} : x;
      });
    case GateName::kPerm123:
      if (d.size() != 3 || d[0] != d[1] || d[1] != d[2]) detail::dims_error(spec.name, d, "[d,d,d]");
      return permutation_unitary(d, [](const Dims& x) { return Dims{x[2], x[0], x[1]}; });
    case GateName::kPerm132:
      if (d.size() != 3 || d[0] != d[1] || d[1] != d[2]) detail::dims_error(spec.name, d, "[d,d,d]");
      return permutation_unitary(d, [](const Dims& x) { return Dims{x[1], x[2], x[0]}; });
    case GateName::kSmb:
      if (d != Dims{2, 2, 2}) detail::dims_error(spec.name, d, "[2,2,2]");
      return UnitaryMatrix(detail::smb_fixture());
    case GateName::kIdentity:
      return UnitaryMatrix::identity(product(d));
  }
  throw std::invalid_argument("unknown gate");
}

inline UnitaryMatrix gate(GateName name, Dims dims) {
  return gate(GateSpec{name, std::move(dims), {}});
}

/// |0><0| (x) first + |1><1| (x) second, control qubit as the leftmost factor.
inline UnitaryMatrix causal_switch(const UnitaryMatrix& first, const UnitaryMatrix& second) {
  if (first.dim() != second.dim())
    throw std::invalid_argument("causal_switch: blocks differ in dimension (" + std::to_string(first.dim()) +
                                " vs " + std::to_string(second.dim()) + ")");
  const auto n = static_cast<Eigen::Index>(first.dim());
  ComplexMatrix m = ComplexMatrix::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = first.matrix();
  m.bottomRightCorner(n, n) = second.matrix();
  return UnitaryMatrix(std::move(m));
}

/// Control qubit state cos(theta/2)|0> + e^{i phase} sin(theta/2)|1>.
struct ControlState {
  double theta = 0.0;
  double phase = 0.0;

  ComplexVector ket() const {
    ComplexVector v(2);
    v(0) = std::cos(theta / 2.0);
    v(1) = std::polar(1.0, phase) * std::sin(theta / 2.0);
    return v;
  }

  /// A unitary R with R|0> = ket().
  UnitaryMatrix preparation() const {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    ComplexMatrix r(2, 2);
    r(0, 0) = c;
    r(1, 0) = std::polar(1.0, phase) * s;
    r(0, 1) = -std::polar(1.0, -phase) * s;
    r(1, 1) = c;
    return UnitaryMatrix(std::move(r));
  }
};

/// full * (I_parties (x) u_env): the fixed |0> environment of the measure then
/// effectively starts in u_env|0>.
inline UnitaryMatrix prepare_environment(const UnitaryMatrix& u_env, const UnitaryMatrix& full,
                                         const SystemDims& dims) {
  if (u_env.dim() != dims.env)
    throw std::invalid_argument("prepare_environment: u_env has dim " + std::to_string(u_env.dim()) +
                                ", environment has dim " + std::to_string(dims.env));
  if (full.dim() != dims.total())
    throw std::invalid_argument("prepare_environment: unitary dim " + std::to_string(full.dim()) +
                                " does not match dims " + dims.label());
  const std::size_t np = product(dims.parties);
  const ComplexMatrix local = tensor({ComplexMatrix::Identity(np, np), u_env.matrix()});
  return UnitaryMatrix(full.matrix() * local);
}

/// Environment layout of a switched evolution: (control, C).
inline SystemDims switch_dims(const SystemDims& component) {
  return SystemDims{component.parties, 2 * component.env};
}

/// Causal switch of two evolutions on `component` dims, with the control qubit
/// absorbed into the environment (control, C) and prepared in `control`.
inline UnitaryMatrix switched_evolution(const UnitaryMatrix& first, const UnitaryMatrix& second,
                                        const SystemDims& component, const ControlState& control) {
  if (first.dim() != component.total())
    throw std::invalid_argument("switched_evolution: unitary does not match dims " + component.label());
  const UnitaryMatrix sup = causal_switch(first, second);

  // (control, parties..., C) -> (parties..., control, C)
  Dims dims{2};
  for (auto p : component.parties) dims.push_back(p);
  dims.push_back(component.env);
  Dims order;
  for (std::size_t j = 1; j <= component.parties.size(); ++j) order.push_back(j);
  order.push_back(0);
  order.push_back(dims.size() - 1);
  const UnitaryMatrix reordered(permute_subsystems(sup.matrix(), dims, order));

  const SystemDims out = switch_dims(component);
  const UnitaryMatrix u_env(
      tensor({control.preparation().matrix(), ComplexMatrix::Identity(component.env, component.env)}));
  return prepare_environment(u_env, reordered, out);
}

}  // namespace qci
