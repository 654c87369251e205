// causality.hpp: reduced-state propagation, F-tensors and the no-influence
// condition for unitary and Kraus evolutions, bipartite and n-party

#pragma once

#include "qci/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qci {

enum class Direction { kAtoB, kBtoA };

inline std::string_view to_string(Direction d) { return d == Direction::kAtoB ? "AtoB" : "BtoA"; }

/// Influencer (source) and influenced (target) party of a bipartite direction.
struct PartyPair {
  std::size_t source;
  std::size_t target;
};

inline PartyPair parties_of(Direction d) {
  return d == Direction::kBtoA ? PartyPair{1, 0} : PartyPair{0, 1};
}

/// Evolution of parties (x) environment: one unitary or a finite Kraus set.
class Channel {
 public:
  enum class Kind { kUnitary, kKraus };

  static Channel unitary(const UnitaryMatrix& u, SystemDims dims) {
    dims.validate();
    if (u.dim() != dims.total())
      throw std::invalid_argument("channel: unitary dim " + std::to_string(u.dim()) + " does not match dims " +
                                  dims.label());
    return Channel(Kind::kUnitary, {u.matrix()}, std::move(dims));
  }

  static Channel kraus(std::vector<ComplexMatrix> ops, SystemDims dims) {
    dims.validate();
    if (ops.empty()) throw std::invalid_argument("channel: empty Kraus set");
    const auto n = static_cast<Eigen::Index>(dims.total());
    ComplexMatrix closure = ComplexMatrix::Zero(n, n);
    for (const auto& k : ops) {
      if (k.rows() != n || k.cols() != n)
        throw std::invalid_argument("channel: Kraus operator shape does not match dims " + dims.label());
      if (!all_finite(k)) throw InvariantError("Channel.finite", "non-finite Kraus entry");
      closure += k.adjoint() * k;
    }
    if (double d = max_abs(closure - ComplexMatrix::Identity(n, n)); d > tolerance::kKrausClosure)
      throw InvariantError("Channel.kraus_closure", "max |sum K^dagger K - I| = " + std::to_string(d));
    return Channel(Kind::kKraus, std::move(ops), std::move(dims));
  }

  Kind kind() const { return kind_; }
  const std::vector<ComplexMatrix>& operators() const { return ops_; }
  const SystemDims& dims() const { return dims_; }

  ComplexMatrix apply(const ComplexMatrix& rho) const {
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (const auto& k : ops_) out.noalias() += k * rho * k.adjoint();
    return out;
  }

  /// Kraus set on the parties alone, K_m = (I (x) <m|_env) U (I (x) |0>_env).
  Channel environment_traced() const {
    const std::size_t np = product(dims_.parties);
    const std::size_t de = dims_.env;
    std::vector<ComplexMatrix> out;
    for (const auto& op : ops_)
      for (std::size_t m = 0; m < de; ++m) {
        ComplexMatrix k(np, np);
        for (std::size_t r = 0; r < np; ++r)
          for (std::size_t c = 0; c < np; ++c) k(r, c) = op(r * de + m, c * de);
        out.push_back(std::move(k));
      }
    return kraus(std::move(out), SystemDims{dims_.parties, 1});
  }

 private:
  Channel(Kind kind, std::vector<ComplexMatrix> ops, SystemDims dims)
      : kind_(kind), ops_(std::move(ops)), dims_(std::move(dims)) {}

  Kind kind_;
  std::vector<ComplexMatrix> ops_;
  SystemDims dims_;
};

/// F(k,l,i,j,i',j'): (k,l) index the influencer's initial state, (i,j) the
/// influenced party's initial state, (i',j') its final state.
class FTensor {
 public:
  FTensor(std::size_t source_dim, std::size_t target_dim, PartyPair parties)
      : ds_(source_dim), dt_(target_dim), parties_(parties),
        values_(ds_ * ds_ * dt_ * dt_ * dt_ * dt_, Complex(0.0)) {}

  std::size_t source_dim() const { return ds_; }
  std::size_t target_dim() const { return dt_; }
  PartyPair parties() const { return parties_; }

  Complex& operator()(std::size_t k, std::size_t l, std::size_t i, std::size_t j, std::size_t ip, std::size_t jp) {
    return values_[index(k, l, i, j, ip, jp)];
  }
  Complex operator()(std::size_t k, std::size_t l, std::size_t i, std::size_t j, std::size_t ip,
                     std::size_t jp) const {
    return values_[index(k, l, i, j, ip, jp)];
  }

  const std::vector<Complex>& values() const { return values_; }

 private:
  std::size_t index(std::size_t k, std::size_t l, std::size_t i, std::size_t j, std::size_t ip,
                    std::size_t jp) const {
    return ((((k * ds_ + l) * dt_ + i) * dt_ + j) * dt_ + ip) * dt_ + jp;
  }

  std::size_t ds_, dt_;
  PartyPair parties_;
  std::vector<Complex> values_;
};

namespace detail {

inline void check_pair(const SystemDims& dims, PartyPair pp) {
  if (pp.source == pp.target) throw std::invalid_argument("influencer and influenced party must differ");
  dims.require_active(pp.source);
  dims.require_active(pp.target);
}

/// States of every party other than source/target, defaulting to maximally mixed.
inline std::vector<DensityMatrix> resolve_bystanders(const SystemDims& dims, PartyPair pp,
                                                     const std::vector<DensityMatrix>* given) {
  std::vector<DensityMatrix> out;
  out.reserve(dims.n_parties());
  for (std::size_t r = 0; r < dims.n_parties(); ++r) {
    if (given && r < given->size() && r != pp.source && r != pp.target) {
      if ((*given)[r].dim() != dims.parties[r])
        throw std::invalid_argument("bystander state for party " + std::to_string(r) + " has wrong dimension");
      out.push_back((*given)[r]);
    } else {
      out.push_back(DensityMatrix::maximally_mixed(dims.parties[r]));
    }
  }
  if (given && !given->empty() && given->size() != dims.n_parties())
    throw std::invalid_argument("bystander list must have one entry per party");
  return out;
}

/// F-tensor of a channel for (source -> target) with bystander parties
/// contracted against their states:
///   sum_mu sum_{bystander a,b} prod_r rho^r_{a_r b_r}
///     sum_{outputs o != target} K^mu_{(i',o),(i,k,a,0)} conj(K^mu_{(j',o),(j,l,b,0)}).
inline FTensor contracted_f_tensor(const Channel& ch, PartyPair pp, const std::vector<DensityMatrix>& states) {
  const SystemDims& sd = ch.dims();
  const Dims all = sd.all();
  const Dims st = strides(all);
  const std::size_t ds = sd.parties[pp.source], dt = sd.parties[pp.target];
  const std::size_t n_slots = all.size();

  // bystander (row, col) digit pairs with their weights
  struct Combo {
    Complex weight;
    std::size_t row_offset;
    std::size_t col_offset;
  };
  std::vector<Combo> combos{{Complex(1.0), 0, 0}};
  for (std::size_t r = 0; r < sd.n_parties(); ++r) {
    if (r == pp.source || r == pp.target) continue;
    std::vector<Combo> next;
    const auto& rho = states[r].matrix();
    for (const auto& c : combos)
      for (std::size_t a = 0; a < sd.parties[r]; ++a)
        for (std::size_t b = 0; b < sd.parties[r]; ++b) {
          const Complex w = rho(a, b);
          if (w == Complex(0.0)) continue;
          next.push_back({c.weight * w, c.row_offset + a * st[r], c.col_offset + b * st[r]});
        }
    combos = std::move(next);
  }

  // offsets of every output configuration with the target digit fixed to 0
  std::vector<std::size_t> others{0};
  for (std::size_t s = 0; s < n_slots; ++s) {
    if (s == pp.target) continue;
    std::vector<std::size_t> next;
    next.reserve(others.size() * all[s]);
    for (auto o : others)
      for (std::size_t v = 0; v < all[s]; ++v) next.push_back(o + v * st[s]);
    others = std::move(next);
  }

  const std::size_t ts = st[pp.target], ss = st[pp.source];
  FTensor f(ds, dt, pp);
  for (const auto& op : ch.operators())
    for (const auto& combo : combos)
      for (std::size_t k = 0; k < ds; ++k)
        for (std::size_t l = 0; l < ds; ++l)
          for (std::size_t i = 0; i < dt; ++i)
            for (std::size_t j = 0; j < dt; ++j) {
              const std::size_t c1 = i * ts + k * ss + combo.row_offset;
              const std::size_t c2 = j * ts + l * ss + combo.col_offset;
              for (std::size_t ip = 0; ip < dt; ++ip)
                for (std::size_t jp = 0; jp < dt; ++jp) {
                  Complex acc = 0.0;
                  for (auto o : others) acc += op(ip * ts + o, c1) * std::conj(op(jp * ts + o, c2));
                  f(k, l, i, j, ip, jp) += combo.weight * acc;
                }
            }
  return f;
}

}  // namespace detail

/// F-tensor for a bipartite direction (AtoB yields the tilde-F of A -> B).
inline FTensor f_tensor(const Channel& ch, Direction direction) {
  if (ch.dims().n_parties() != 2) throw std::invalid_argument("f_tensor: channel is not bipartite");
  const PartyPair pp = parties_of(direction);
  detail::check_pair(ch.dims(), pp);
  return detail::contracted_f_tensor(ch, pp, detail::resolve_bystanders(ch.dims(), pp, nullptr));
}

/// F-tensor for source -> target among n parties, bystanders contracted.
inline FTensor f_tensor_nparty(const Channel& ch, std::size_t source, std::size_t target,
                               const std::vector<DensityMatrix>& bystanders = {}) {
  const PartyPair pp{source, target};
  detail::check_pair(ch.dims(), pp);
  return detail::contracted_f_tensor(ch, pp, detail::resolve_bystanders(ch.dims(), pp, &bystanders));
}

struct DirectionVerdict {
  bool influence = false;
  double max_violation = 0.0;
  double tolerance = 0.0;
};

struct CausalVerdict {
  bool a_to_b = false;
  bool b_to_a = false;
  double violation_a_to_b = 0.0;
  double violation_b_to_a = 0.0;
  double max_violation = 0.0;
  double tolerance = 0.0;
};

inline constexpr double kDefaultConditionTolerance = 1e-9;

/// No influence iff off-diagonal influencer blocks vanish and the diagonal
/// blocks do not depend on the influencer index.
inline DirectionVerdict check_f_tensor(const FTensor& f, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const std::size_t ds = f.source_dim(), dt = f.target_dim();
  double worst = 0.0;
  for (std::size_t k = 0; k < ds; ++k)
    for (std::size_t l = 0; l < ds; ++l)
      for (std::size_t i = 0; i < dt; ++i)
        for (std::size_t j = 0; j < dt; ++j)
          for (std::size_t ip = 0; ip < dt; ++ip)
            for (std::size_t jp = 0; jp < dt; ++jp) {
              const Complex v = f(k, l, i, j, ip, jp);
              const double dev = k == l ? std::abs(v - f(0, 0, i, j, ip, jp)) : std::abs(v);
              worst = std::max(worst, dev);
            }
  return {worst > tol, worst, tol};
}

inline DirectionVerdict check_no_ci(const Channel& ch, Direction direction,
                                    double tol = kDefaultConditionTolerance) {
  return check_f_tensor(f_tensor(ch, direction), tol);
}

inline CausalVerdict check_causality(const Channel& ch, double tol = kDefaultConditionTolerance) {
  const auto ab = check_no_ci(ch, Direction::kAtoB, tol);
  const auto ba = check_no_ci(ch, Direction::kBtoA, tol);
  return {ab.influence,      ba.influence, ab.max_violation, ba.max_violation,
          std::max(ab.max_violation, ba.max_violation), tol};
}

struct NPartyVerdict {
  bool influence = false;
  double max_violation = 0.0;
  double tolerance = 0.0;
  std::vector<DensityMatrix> bystanders;  // states used (worst case for a sweep)
};

/// n-party condition for source -> target at fixed bystander states
/// (maximally mixed when none are given).
inline NPartyVerdict check_no_ci_nparty(const Channel& ch, std::size_t source, std::size_t target,
                                        const std::vector<DensityMatrix>& bystanders = {},
                                        double tol = kDefaultConditionTolerance) {
  const PartyPair pp{source, target};
  detail::check_pair(ch.dims(), pp);
  auto states = detail::resolve_bystanders(ch.dims(), pp, &bystanders);
  const auto v = check_f_tensor(detail::contracted_f_tensor(ch, pp, states), tol);
  return {v.influence, v.max_violation, tol, std::move(states)};
}

/// d^2 pure states spanning the Hermitian d x d matrices: |i>, (|i>+|j>)/sqrt2,
/// (|i>+i|j>)/sqrt2 for i<j.
inline std::vector<DensityMatrix> probe_states(std::size_t d) {
  std::vector<DensityMatrix> out;
  for (std::size_t i = 0; i < d; ++i) out.push_back(DensityMatrix::basis(d, i));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      ComplexVector v = basis_ket(d, i) + basis_ket(d, j);
      out.push_back(DensityMatrix::pure(v));
      ComplexVector w = basis_ket(d, i) + Complex(0.0, 1.0) * basis_ket(d, j);
      out.push_back(DensityMatrix::pure(w));
    }
  return out;
}

/// Condition checked for every product of bystander probe states. The F-tensor
/// is multilinear in the bystander states and the probes span each state space,
/// so this covers all product bystander preparations.
inline NPartyVerdict check_no_ci_nparty_sweep(const Channel& ch, std::size_t source, std::size_t target,
                                              double tol = kDefaultConditionTolerance) {
  const PartyPair pp{source, target};
  detail::check_pair(ch.dims(), pp);
  const SystemDims& sd = ch.dims();
  std::vector<std::vector<DensityMatrix>> probes(sd.n_parties());
  std::vector<std::size_t> counts(sd.n_parties(), 1);
  for (std::size_t r = 0; r < sd.n_parties(); ++r) {
    if (r == source || r == target) {
      probes[r].push_back(DensityMatrix::maximally_mixed(sd.parties[r]));
    } else {
      probes[r] = probe_states(sd.parties[r]);
    }
    counts[r] = probes[r].size();
  }

  NPartyVerdict worst{false, 0.0, tol, {}};
  std::vector<std::size_t> pick(sd.n_parties(), 0);
  while (true) {
    std::vector<DensityMatrix> states;
    for (std::size_t r = 0; r < sd.n_parties(); ++r) states.push_back(probes[r][pick[r]]);
    const auto v = check_f_tensor(detail::contracted_f_tensor(ch, pp, states), tol);
    if (worst.bystanders.empty() || v.max_violation > worst.max_violation) {
      worst.max_violation = v.max_violation;
      worst.bystanders = std::move(states);
    }
    std::size_t r = 0;
    for (; r < pick.size(); ++r) {
      if (++pick[r] < counts[r]) break;
      pick[r] = 0;
    }
    if (r == pick.size()) break;
  }
  worst.influence = worst.max_violation > tol;
  return worst;
}

/// Final reduced state of `keep` after evolving the product of `states` with
/// the environment in |0>.
inline DensityMatrix evolve_reduced_party(const Channel& ch, const std::vector<DensityMatrix>& states,
                                          std::size_t keep) {
  const SystemDims& sd = ch.dims();
  if (states.size() != sd.n_parties()) throw std::invalid_argument("evolve: one state per party required");
  std::vector<ComplexMatrix> factors;
  for (std::size_t r = 0; r < states.size(); ++r) {
    if (states[r].dim() != sd.parties[r])
      throw std::invalid_argument("evolve: state " + std::to_string(r) + " has wrong dimension");
    factors.push_back(states[r].matrix());
  }
  factors.push_back(DensityMatrix::basis(sd.env, 0).matrix());
  const ComplexMatrix out = ch.apply(tensor(factors));
  return DensityMatrix(partial_trace(out, sd.all(), {keep}));
}

/// (rho'^A, rho'^B) for a bipartite channel; rho_env defaults to |0><0|.
inline std::pair<DensityMatrix, DensityMatrix> evolve_reduced(const Channel& ch, const DensityMatrix& rho_a,
                                                              const DensityMatrix& rho_b,
                                                              const std::optional<DensityMatrix>& rho_env = {}) {
  const SystemDims& sd = ch.dims();
  if (sd.n_parties() != 2) throw std::invalid_argument("evolve_reduced: channel is not bipartite");
  if (rho_a.dim() != sd.parties[0] || rho_b.dim() != sd.parties[1])
    throw std::invalid_argument("evolve_reduced: state dimension mismatch with dims " + sd.label());
  const DensityMatrix env = rho_env.value_or(DensityMatrix::basis(sd.env, 0));
  if (env.dim() != sd.env) throw std::invalid_argument("evolve_reduced: environment dimension mismatch");
  const ComplexMatrix out = ch.apply(tensor({rho_a.matrix(), rho_b.matrix(), env.matrix()}));
  const Dims all = sd.all();
  return {DensityMatrix(partial_trace(out, all, {0})), DensityMatrix(partial_trace(out, all, {1}))};
}

struct DependenceReport {
  bool depends = false;
  double max_variation = 0.0;
  double tolerance = 0.0;
};

namespace detail {

inline std::size_t span_rank(const std::vector<DensityMatrix>& states, std::size_t d) {
  ComplexMatrix cols(d * d, states.size());
  for (std::size_t s = 0; s < states.size(); ++s)
    cols.col(s) = states[s].matrix().reshaped();
  Eigen::FullPivLU<ComplexMatrix> lu(cols);
  lu.setThreshold(1e-10);
  return static_cast<std::size_t>(lu.rank());
}

inline void check_probe_grid(const std::vector<DensityMatrix>& probes, std::size_t d, const char* what) {
  for (const auto& p : probes)
    if (p.dim() != d) throw std::invalid_argument(std::string(what) + " probe has wrong dimension");
  if (probes.size() < d * d || span_rank(probes, d) < d * d)
    throw std::invalid_argument(std::string("degenerate probe grid: ") + what + " probes must span all " +
                                std::to_string(d) + "x" + std::to_string(d) + " Hermitian matrices");
}

}  // namespace detail

/// Direct test of the definition: does the target's final state change when
/// only the source's initial state is varied over a spanning probe set?
inline DependenceReport brute_force_dependence_nparty(const Channel& ch, std::size_t source, std::size_t target,
                                                      const std::vector<DensityMatrix>& target_probes,
                                                      const std::vector<DensityMatrix>& source_probes,
                                                      const std::vector<DensityMatrix>& bystanders = {},
                                                      double tol = 1e-8) {
  const PartyPair pp{source, target};
  detail::check_pair(ch.dims(), pp);
  const SystemDims& sd = ch.dims();
  detail::check_probe_grid(target_probes, sd.parties[target], "influenced-party");
  detail::check_probe_grid(source_probes, sd.parties[source], "influencer");
  auto states = detail::resolve_bystanders(sd, pp, &bystanders);

  double worst = 0.0;
  for (const auto& tp : target_probes) {
    states[target] = tp;
    std::optional<ComplexMatrix> reference;
    for (const auto& sp : source_probes) {
      states[source] = sp;
      const ComplexMatrix out = evolve_reduced_party(ch, states, target).matrix();
      if (!reference) {
        reference = out;
      } else {
        worst = std::max(worst, max_abs(out - *reference));
      }
    }
  }
  return {worst > tol, worst, tol};
}

inline DependenceReport brute_force_dependence(const Channel& ch, Direction direction,
                                               const std::vector<DensityMatrix>& target_probes,
                                               const std::vector<DensityMatrix>& source_probes,
                                               double tol = 1e-8) {
  if (ch.dims().n_parties() != 2) throw std::invalid_argument("brute_force_dependence: channel is not bipartite");
  const PartyPair pp = parties_of(direction);
  return brute_force_dependence_nparty(ch, pp.source, pp.target, target_probes, source_probes, {}, tol);
}

/// Same, with the spanning probe_states() grid on both parties.
inline DependenceReport brute_force_dependence(const Channel& ch, Direction direction, double tol = 1e-8) {
  if (ch.dims().n_parties() != 2) throw std::invalid_argument("brute_force_dependence: channel is not bipartite");
  const PartyPair pp = parties_of(direction);
  const auto& p = ch.dims().parties;
  return brute_force_dependence_nparty(ch, pp.source, pp.target, probe_states(p[pp.target]),
                                       probe_states(p[pp.source]), {}, tol);
}

}  // namespace qci
