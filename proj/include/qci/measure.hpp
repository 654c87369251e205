// measure.hpp: causal-influence measure: closed form, Monte Carlo estimate of
// the defining Haar average, Haar expectation, order-2 unitary moments, histograms

#pragma once

#include "qci/causality.hpp"
#include "qci/parallel.hpp"

#include <boost/rational.hpp>

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace qci {

using Rational = boost::rational<std::int64_t>;

/// How the diagonal parameters rho_hh (h != 0) of the influencer enter.
///  kTraceConstrained: rho_00 = 1 - sum_{h>0} rho_hh, so d rho_kk / d rho_hh = delta_kh - delta_k0.
///  kAsPrinted:        D_{kk,hh} = (-1)^{delta_k0} for every h != 0 (identical for d = 2).
enum class DerivativeConvention { kTraceConstrained, kAsPrinted };

class DTensor {
 public:
  explicit DTensor(std::size_t d, DerivativeConvention conv = DerivativeConvention::kTraceConstrained)
      : d_(d), conv_(conv) {
    if (d < 2) throw std::invalid_argument("d_tensor: d must be >= 2");
  }

  std::size_t dim() const { return d_; }
  DerivativeConvention convention() const { return conv_; }

  int operator()(std::size_t k, std::size_t l, std::size_t h, std::size_t f) const {
    if (h != f) return (k == h && l == f) ? 1 : 0;
    if (h == 0 || k != l) return 0;
    if (conv_ == DerivativeConvention::kAsPrinted) return k == 0 ? -1 : 1;
    return (k == h ? 1 : 0) - (k == 0 ? 1 : 0);
  }

  struct Entry {
    std::size_t k, l;
    int value;
  };

  /// Nonzero entries of the (h,f) slice.
  std::vector<Entry> slice(std::size_t h, std::size_t f) const {
    std::vector<Entry> out;
    for (std::size_t k = 0; k < d_; ++k)
      for (std::size_t l = 0; l < d_; ++l)
        if (int v = (*this)(k, l, h, f); v != 0) out.push_back({k, l, v});
    return out;
  }

 private:
  std::size_t d_;
  DerivativeConvention conv_;
};

inline DTensor d_tensor(std::size_t d, DerivativeConvention conv = DerivativeConvention::kTraceConstrained) {
  return DTensor(d, conv);
}

enum class Method { kClosedForm, kMonteCarlo };

inline std::string_view to_string(Method m) { return m == Method::kClosedForm ? "closed" : "monte_carlo"; }

struct CIResult {
  double value = 0.0;
  std::string direction;  // "AtoB", "BtoA", or "<l>to<k>" for party indices
  Method method = Method::kClosedForm;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::string dims;
};

inline std::string nparty_label(std::size_t source, std::size_t target) {
  return std::to_string(source) + "to" + std::to_string(target);
}

/// Closed form from an F-tensor:
///   G_hf(i,j,i',j') = sum_kl D_{kl,hf} F(k,l,i,j,i',j')
///   I = sum_{h f i' j'} [ sum_ij |G|^2 + |sum_i G_ii|^2 ] / (d (d+1)).
inline double ci_from_f_tensor(const FTensor& f, DerivativeConvention conv = DerivativeConvention::kTraceConstrained) {
  const std::size_t ds = f.source_dim(), dt = f.target_dim();
  const DTensor dten(ds, conv);
  double total = 0.0;
  for (std::size_t h = 0; h < ds; ++h)
    for (std::size_t fh = 0; fh < ds; ++fh) {
      const auto entries = dten.slice(h, fh);
      if (entries.empty()) continue;
      for (std::size_t ip = 0; ip < dt; ++ip)
        for (std::size_t jp = 0; jp < dt; ++jp) {
          Complex diag_sum = 0.0;
          for (std::size_t i = 0; i < dt; ++i)
            for (std::size_t j = 0; j < dt; ++j) {
              Complex g = 0.0;
              for (const auto& e : entries) g += static_cast<double>(e.value) * f(e.k, e.l, i, j, ip, jp);
              total += std::norm(g);
              if (i == j) diag_sum += g;
            }
          total += std::norm(diag_sum);
        }
    }
  return total / static_cast<double>(dt * (dt + 1));
}

inline CIResult ci_closed_form(const Channel& ch, Direction direction,
                               DerivativeConvention conv = DerivativeConvention::kTraceConstrained) {
  return {ci_from_f_tensor(f_tensor(ch, direction), conv), std::string(to_string(direction)), Method::kClosedForm,
          0.0, 0, ch.dims().label()};
}

/// n-party measure source -> target with bystanders contracted into F
/// (maximally mixed when none are given).
inline CIResult ci_nparty(const Channel& ch, std::size_t source, std::size_t target,
                          const std::vector<DensityMatrix>& bystanders = {},
                          DerivativeConvention conv = DerivativeConvention::kTraceConstrained) {
  return {ci_from_f_tensor(f_tensor_nparty(ch, source, target, bystanders), conv), nparty_label(source, target),
          Method::kClosedForm, 0.0, 0, ch.dims().label()};
}

struct MonteCarloOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = available parallelism
  DerivativeConvention convention = DerivativeConvention::kTraceConstrained;
};

namespace detail {

/// Linear response of the target's final state to the influencer's matrix
/// elements, propagated as kets: for a pure target state psi,
///   u_k = K (psi (x) |k> (x) |bystander eigenvectors> (x) |0>),
///   T_kl = Tr_{not target} u_k u_l^dagger  (weighted over Kraus ops and bystander spectra),
///   d rho'_target / d rho_source_hf = sum_kl D_{kl,hf} T_kl.
class ResponseSampler {
 public:
  ResponseSampler(const Channel& ch, PartyPair pp, const std::vector<DensityMatrix>& states,
                  DerivativeConvention conv)
      : ds_(ch.dims().parties[pp.source]), dt_(ch.dims().parties[pp.target]) {
    const SystemDims& sd = ch.dims();
    const Dims all = sd.all();
    const Dims st = strides(all);

    // pure-state ensembles of the bystanders (eigendecompositions)
    struct Branch {
      double weight;
      ComplexVector ket;  // over the full space, with source/target/env digits set to 0
    };
    std::vector<Branch> branches{{1.0, basis_ket(sd.total(), 0)}};
    for (std::size_t r = 0; r < sd.n_parties(); ++r) {
      if (r == pp.source || r == pp.target) continue;
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(states[r].matrix());
      std::vector<Branch> next;
      for (const auto& b : branches)
        for (Eigen::Index e = 0; e < es.eigenvalues().size(); ++e) {
          const double w = es.eigenvalues()(e);
          if (w <= 1e-15) continue;
          ComplexVector ket = ComplexVector::Zero(sd.total());
          for (Eigen::Index idx = 0; idx < b.ket.size(); ++idx) {
            if (b.ket(idx) == Complex(0.0)) continue;
            for (std::size_t a = 0; a < sd.parties[r]; ++a)
              ket(idx + a * st[r]) += b.ket(idx) * es.eigenvectors()(a, e);
          }
          next.push_back({b.weight * w, std::move(ket)});
        }
      branches = std::move(next);
    }

    std::vector<std::size_t> others{0};
    for (std::size_t s = 0; s < all.size(); ++s) {
      if (s == pp.target) continue;
      std::vector<std::size_t> next;
      for (auto o : others)
        for (std::size_t v = 0; v < all[s]; ++v) next.push_back(o + v * st[s]);
      others = std::move(next);
    }
    n_others_ = others.size();

    // maps[(term, k)]: (dt * n_others) x dt matrix taking psi to u_k in (i', other) layout
    const std::size_t ts = st[pp.target], ss = st[pp.source];
    for (const auto& op : ch.operators())
      for (const auto& b : branches) {
        weights_.push_back(b.weight);
        const ComplexVector base = b.ket;
        for (std::size_t k = 0; k < ds_; ++k) {
          ComplexMatrix m = ComplexMatrix::Zero(dt_ * n_others_, dt_);
          for (std::size_t i = 0; i < dt_; ++i) {
            ComplexVector in = ComplexVector::Zero(sd.total());
            for (Eigen::Index idx = 0; idx < base.size(); ++idx)
              if (base(idx) != Complex(0.0)) in(idx + i * ts + k * ss) = base(idx);
            const ComplexVector out = op * in;
            for (std::size_t ip = 0; ip < dt_; ++ip)
              for (std::size_t o = 0; o < n_others_; ++o) m(ip * n_others_ + o, i) = out(ip * ts + others[o]);
          }
          maps_.push_back(std::move(m));
        }
      }

    const DTensor dten(ds_, conv);
    for (std::size_t h = 0; h < ds_; ++h)
      for (std::size_t f = 0; f < ds_; ++f)
        if (auto s = dten.slice(h, f); !s.empty()) slices_.push_back(std::move(s));
  }

  std::size_t target_dim() const { return dt_; }

  /// sum_{h f} || d rho'_target / d rho_source_hf ||_F^2 at target state |psi>.
  double value(const ComplexVector& psi) const {
    std::vector<ComplexMatrix> t(ds_ * ds_, ComplexMatrix::Zero(dt_, dt_));
    std::vector<ComplexMatrix> u(ds_);
    for (std::size_t term = 0; term < weights_.size(); ++term) {
      for (std::size_t k = 0; k < ds_; ++k)
        u[k] = (maps_[term * ds_ + k] * psi).reshaped<Eigen::RowMajor>(dt_, n_others_);
      for (std::size_t k = 0; k < ds_; ++k)
        for (std::size_t l = 0; l < ds_; ++l) t[k * ds_ + l].noalias() += weights_[term] * u[k] * u[l].adjoint();
    }
    double total = 0.0;
    ComplexMatrix g(dt_, dt_);
    for (const auto& s : slices_) {
      g.setZero();
      for (const auto& e : s) g += static_cast<double>(e.value) * t[e.k * ds_ + e.l];
      total += g.squaredNorm();
    }
    return total;
  }

 private:
  std::size_t ds_, dt_, n_others_ = 0;
  std::vector<double> weights_;
  std::vector<ComplexMatrix> maps_;
  std::vector<std::vector<DTensor::Entry>> slices_;
};

inline SampleStats run_sampler(const ResponseSampler& sampler, const MonteCarloOptions& opt) {
  if (opt.samples < 100) throw std::invalid_argument("monte carlo: samples must be >= 100");
  const std::size_t blocks = block_count(opt.samples);
  const auto partial = parallel_map<SampleStats>(blocks, opt.threads, [&](std::size_t b) {
    auto rng = block_stream(opt.seed, b);
    SampleStats s;
    for (std::size_t n = block_size(opt.samples, b); n > 0; --n)
      s.add(sampler.value(random_pure_ket(sampler.target_dim(), rng)));
    return s;
  });
  SampleStats total;
  for (const auto& s : partial) total.merge(s);
  return total;
}

}  // namespace detail

/// Haar average over pure target states of the exact derivative sum.
inline CIResult ci_monte_carlo(const Channel& ch, Direction direction, const MonteCarloOptions& opt = {}) {
  if (ch.dims().n_parties() != 2) throw std::invalid_argument("ci_monte_carlo: channel is not bipartite");
  const PartyPair pp = parties_of(direction);
  detail::check_pair(ch.dims(), pp);
  const detail::ResponseSampler sampler(ch, pp, detail::resolve_bystanders(ch.dims(), pp, nullptr), opt.convention);
  const SampleStats s = detail::run_sampler(sampler, opt);
  return {s.mean, std::string(to_string(direction)), Method::kMonteCarlo, s.std_error(), s.count,
          ch.dims().label()};
}

inline CIResult ci_monte_carlo_nparty(const Channel& ch, std::size_t source, std::size_t target,
                                      const std::vector<DensityMatrix>& bystanders = {},
                                      const MonteCarloOptions& opt = {}) {
  const PartyPair pp{source, target};
  detail::check_pair(ch.dims(), pp);
  const detail::ResponseSampler sampler(ch, pp, detail::resolve_bystanders(ch.dims(), pp, &bystanders),
                                        opt.convention);
  const SampleStats s = detail::run_sampler(sampler, opt);
  return {s.mean, nparty_label(source, target), Method::kMonteCarlo, s.std_error(), s.count, ch.dims().label()};
}

/// Haar expectation of I_{B->A} over U(d_A d_B d_C):
///   (d_B-1)/(d_A^2 d_B^2 d_C^2 - 1) [2 d_A^2 d_B^2 d_C - 2 d_B^2 d_C + d_A (d_B-2)^2 (d_B^2 d_C^2 - 1)].
/// AtoB swaps the roles of d_A and d_B.
inline Rational expected_ci(std::size_t d_a, std::size_t d_b, std::size_t d_c, Direction direction) {
  if (d_a < 2 || d_b < 2 || d_c < 1) throw std::invalid_argument("expected_ci: need d_A, d_B >= 2 and d_C >= 1");
  if (direction == Direction::kAtoB) std::swap(d_a, d_b);
  using Wide = __int128;
  const Wide a = static_cast<Wide>(d_a), b = static_cast<Wide>(d_b), c = static_cast<Wide>(d_c);
  const Wide den = a * a * b * b * c * c - 1;
  const Wide num = (b - 1) * (2 * a * a * b * b * c - 2 * b * b * c + a * (b - 2) * (b - 2) * (b * b * c * c - 1));
  constexpr Wide limit = std::numeric_limits<std::int64_t>::max();
  if (num > limit || den > limit) throw std::invalid_argument("expected_ci: dimensions too large for 64-bit rationals");
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// Integral of conj(U_{p1 q1}) conj(U_{p2 q2}) U_{r1 s1} U_{r2 s2} over U(D).
struct MomentQuery {
  std::array<std::size_t, 2> p{}, q{}, r{}, s{};
  std::size_t dim = 2;

  void validate() const {
    if (dim == 0) throw std::invalid_argument("moment query: D must be >= 1");
    for (const auto* idx : {&p, &q, &r, &s})
      for (auto x : *idx)
        if (x >= dim) throw std::invalid_argument("moment query: index out of range for D=" + std::to_string(dim));
  }
};

inline Rational haar_moment2(const MomentQuery& mq) {
  mq.validate();
  const std::int64_t d = static_cast<std::int64_t>(mq.dim);
  if (d == 1) return Rational(1);
  auto dl = [](std::size_t x, std::size_t y) { return Rational(x == y ? 1 : 0); };
  const auto& [p1, p2] = mq.p;
  const auto& [q1, q2] = mq.q;
  const auto& [r1, r2] = mq.r;
  const auto& [s1, s2] = mq.s;
  const Rational one(1);
  const Rational a(1, d * (d + 1));       // 1/(D(D+1))
  const Rational b(1, d * d - 1);         // 1/(D^2-1)
  const Rational c(1, d * (d * d - 1));   // 1/(D(D^2-1))
  const Rational dp = dl(p1, p2), dq = dl(q1, q2);

  const Rational x = dq * (one + dp) * a + (one - dq) * (dp * a + (one - dp) * b);
  const Rational y = dq * (one + dp) * a + (one - dq) * (dp * a - (one - dp) * c);

  const Rational t1 = dl(p1, r1) * dl(p2, r2) *
                      (dl(q1, s1) * dl(q2, s2) * x + dl(q1, s2) * dl(q2, s1) * y -
                       dq * dl(q1, s1) * dl(q1, s2) * (one + dp) * a);
  const Rational t2 = dl(q1, s1) * dl(q2, s2) *
                      (dl(p1, r1) * dl(p2, r2) * x + dl(p1, r2) * dl(p2, r1) * y -
                       dp * dl(p1, r1) * dl(p1, r2) * (one + dq) * a);
  const Rational t3 = (dl(p1, r2) * dl(p2, r1) * dl(q1, s2) * dl(q2, s1) -
                       dl(p1, r1) * dl(p2, r2) * dl(q1, s1) * dl(q2, s2)) * x;
  const Rational t4 = -dl(p1, r1) * dp * dl(p1, r2) * dl(q1, s2) * dl(q2, s1) * (dq * 2 * a + (one - dq) * a);
  const Rational t5 = -dl(p1, r2) * dl(p2, r1) * dl(q1, s1) * dq * dl(q2, s2) * (dp * 2 * a + (one - dp) * a);
  const Rational t6 = dl(p1, r1) * dp * dl(p1, r2) * dl(q1, s1) * dl(q1, s2) * dq * 2 * a;
  return t1 + t2 + t3 + t4 + t5 + t6;
}

struct HistogramSummary {
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t samples = 0;
  double bin_width = 0.02;
  std::vector<std::size_t> counts;  // bins [n w, (n+1) w) over [0, ceil(max)]
  std::vector<double> values;       // per-sample CI, in sample order
};

struct HistogramOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  double bin_width = 0.02;
  Direction direction = Direction::kBtoA;
  DerivativeConvention convention = DerivativeConvention::kTraceConstrained;
};

/// Closed-form CI of Haar random unitaries on `dims`.
inline HistogramSummary histogram(const SystemDims& dims, const HistogramOptions& opt = {}) {
  if (opt.samples < 100) throw std::invalid_argument("histogram: samples must be >= 100");
  if (!(opt.bin_width > 0.0)) throw std::invalid_argument("histogram: bin width must be positive");
  if (dims.n_parties() != 2) throw std::invalid_argument("histogram: dims must be bipartite");
  detail::check_pair(dims, parties_of(opt.direction));
  const std::size_t blocks = block_count(opt.samples);
  const auto parts = parallel_map<std::vector<double>>(blocks, opt.threads, [&](std::size_t b) {
    auto rng = block_stream(opt.seed, b);
    std::vector<double> out;
    for (std::size_t n = block_size(opt.samples, b); n > 0; --n) {
      const Channel ch = Channel::unitary(haar_unitary(dims.total(), rng), dims);
      out.push_back(ci_closed_form(ch, opt.direction, opt.convention).value);
    }
    return out;
  });

  HistogramSummary h;
  h.bin_width = opt.bin_width;
  SampleStats stats;
  for (const auto& part : parts)
    for (double v : part) {
      h.values.push_back(v);
      stats.add(v);
    }
  h.samples = stats.count;
  h.mean = stats.mean;
  h.std_dev = stats.std_dev();
  const double top = std::max(1.0, std::ceil(*std::max_element(h.values.begin(), h.values.end())));
  h.counts.assign(static_cast<std::size_t>(std::llround(top / opt.bin_width)), 0);
  for (double v : h.values) {
    auto bin = static_cast<std::size_t>(v / opt.bin_width);
    h.counts[std::min(bin, h.counts.size() - 1)]++;
  }
  return h;
}

}  // namespace qci
