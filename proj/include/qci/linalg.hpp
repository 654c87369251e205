// linalg.hpp: dense complex linear algebra for small multipartite Hilbert spaces

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qci {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Dims = std::vector<std::size_t>;

/// Raised when a value violates one of the named numerical invariants
/// (unitarity, Hermiticity, trace, positivity, Kraus closure, ...).
class InvariantError : public std::runtime_error {
 public:
  InvariantError(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

namespace tolerance {
inline constexpr double kHermitian = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kPsdFloor = -1e-9;
inline constexpr double kUnitary = 1e-10;
inline constexpr double kKrausClosure = 1e-10;
}  // namespace tolerance

inline std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string dims_label(std::span<const std::size_t> dims) {
  std::ostringstream os;
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
  return os.str();
}

/// Row-major strides: the leftmost subsystem is the most significant digit.
inline Dims strides(std::span<const std::size_t> dims) {
  Dims s(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
  return s;
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline double hermiticity_defect(const ComplexMatrix& m) {
  return max_abs(m - m.adjoint());
}

inline double unitarity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return max_abs(m.adjoint() * m - ComplexMatrix::Identity(m.rows(), m.cols()));
}

/// Smallest eigenvalue of the Hermitian part of m.
inline double min_eigenvalue(const ComplexMatrix& m) {
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) { validate(); }

  static DensityMatrix pure(const ComplexVector& ket) {
    const double norm = ket.norm();
    if (norm == 0.0) throw std::invalid_argument("pure state from zero vector");
    const ComplexVector v = ket / norm;
    return DensityMatrix(v * v.adjoint());
  }

  static DensityMatrix basis(std::size_t dim, std::size_t k) {
    if (k >= dim) throw std::invalid_argument("basis index out of range");
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(k, k) = 1.0;
    return DensityMatrix(std::move(m));
  }

  static DensityMatrix maximally_mixed(std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
    return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  void validate() const {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
      throw std::invalid_argument("density matrix must be square and nonempty");
    if (!all_finite(m_)) throw InvariantError("DensityMatrix.finite", "non-finite entry");
    if (double d = hermiticity_defect(m_); d > tolerance::kHermitian)
      throw InvariantError("DensityMatrix.hermitian", "max |rho - rho^dagger| = " + std::to_string(d));
    if (double d = std::abs(m_.trace() - 1.0); d > tolerance::kTrace)
      throw InvariantError("DensityMatrix.trace", "|tr rho - 1| = " + std::to_string(d));
    if (double e = min_eigenvalue(m_); e < tolerance::kPsdFloor)
      throw InvariantError("DensityMatrix.psd", "min eigenvalue " + std::to_string(e));
  }

  ComplexMatrix m_;
};

class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
      throw std::invalid_argument("unitary must be square and nonempty");
    if (!all_finite(m_)) throw InvariantError("UnitaryMatrix.finite", "non-finite entry");
    if (double d = unitarity_defect(m_); d > tolerance::kUnitary)
      throw InvariantError("UnitaryMatrix.unitary", "max |U^dagger U - I| = " + std::to_string(d));
  }

  static UnitaryMatrix identity(std::size_t dim) {
    return UnitaryMatrix(ComplexMatrix::Identity(dim, dim));
  }

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  ComplexMatrix m_;
};

/// Subsystem layout: the parties (A, B or 1..n) followed by one environment
/// factor. The environment always starts in its first basis ket.
struct SystemDims {
  Dims parties;
  std::size_t env = 1;

  static SystemDims bipartite(std::size_t d_a, std::size_t d_b, std::size_t d_c = 1) {
    SystemDims s{{d_a, d_b}, d_c};
    s.validate();
    return s;
  }

  /// [d_A, d_B] or [d_A, d_B, d_C].
  static SystemDims bipartite_from(std::span<const std::size_t> list) {
    if (list.size() == 2) return bipartite(list[0], list[1]);
    if (list.size() == 3) return bipartite(list[0], list[1], list[2]);
    throw std::invalid_argument("bipartite dims need 2 or 3 entries, got " + std::to_string(list.size()));
  }

  /// [d_1, ..., d_n, d_env] with n >= 2.
  static SystemDims nparty_from(std::span<const std::size_t> list) {
    if (list.size() < 3)
      throw std::invalid_argument("n-party dims need at least two parties plus the environment");
    SystemDims s{Dims(list.begin(), list.end() - 1), list.back()};
    s.validate();
    return s;
  }

  std::size_t n_parties() const { return parties.size(); }

  Dims all() const {
    Dims d = parties;
    d.push_back(env);
    return d;
  }

  std::size_t total() const { return product(parties) * env; }

  std::string label() const { return dims_label(all()); }

  void validate() const {
    if (parties.empty()) throw std::invalid_argument("at least one party required");
    if (env == 0 || std::find(parties.begin(), parties.end(), 0u) != parties.end())
      throw std::invalid_argument("subsystem dimensions must be >= 1");
  }

  /// Influencer and influenced parties need a nontrivial state space.
  void require_active(std::size_t party) const {
    if (party >= parties.size())
      throw std::invalid_argument("party index " + std::to_string(party) + " out of range");
    if (parties[party] < 2)
      throw std::invalid_argument("party " + std::to_string(party) + " has trivial dimension");
  }

  bool operator==(const SystemDims&) const = default;
};

/// Kronecker product in the given order.
inline ComplexMatrix tensor(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) throw std::invalid_argument("tensor of an empty list");
  ComplexMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) {
    ComplexMatrix next = Eigen::kroneckerProduct(out, factors[i]).eval();
    out = std::move(next);
  }
  return out;
}

inline ComplexMatrix tensor(std::initializer_list<ComplexMatrix> factors) {
  return tensor(std::span<const ComplexMatrix>(factors.begin(), factors.size()));
}

inline ComplexVector tensor_kets(std::span<const ComplexVector> kets) {
  if (kets.empty()) throw std::invalid_argument("tensor of an empty list");
  ComplexVector out = kets.front();
  for (std::size_t i = 1; i < kets.size(); ++i) {
    ComplexVector next(out.size() * kets[i].size());
    for (Eigen::Index a = 0; a < out.size(); ++a)
      next.segment(a * kets[i].size(), kets[i].size()) = out(a) * kets[i];
    out = std::move(next);
  }
  return out;
}

/// Trace over every subsystem not listed in `keep`. Kept subsystems appear in
/// ascending index order in the result.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                   std::vector<std::size_t> keep) {
  const std::size_t n = product(dims);
  if (m.rows() != static_cast<Eigen::Index>(n) || m.cols() != m.rows())
    throw std::invalid_argument("partial_trace: matrix dimension " + std::to_string(m.rows()) +
                                " does not match dims " + dims_label(dims));
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.back() >= dims.size()) throw std::invalid_argument("partial_trace: subsystem index out of range");

  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) kept[k] = true;
  Dims kept_dims, traced_dims;
  for (std::size_t s = 0; s < dims.size(); ++s) (kept[s] ? kept_dims : traced_dims).push_back(dims[s]);
  const Dims st = strides(dims);
  const Dims kst = strides(kept_dims);
  const Dims tst = strides(traced_dims);
  const std::size_t nk = product(kept_dims);
  const std::size_t nt = product(traced_dims);

  // offset of each kept (traced) configuration inside the full index
  std::vector<std::size_t> kept_off(nk, 0), traced_off(nt, 0);
  for (std::size_t a = 0; a < nk; ++a) {
    std::size_t rem = a, pos = 0;
    for (std::size_t s = 0; s < dims.size(); ++s) {
      if (!kept[s]) continue;
      kept_off[a] += (rem / kst[pos]) * st[s];
      rem %= kst[pos];
      ++pos;
    }
  }
  for (std::size_t b = 0; b < nt; ++b) {
    std::size_t rem = b, pos = 0;
    for (std::size_t s = 0; s < dims.size(); ++s) {
      if (kept[s]) continue;
      traced_off[b] += (rem / tst[pos]) * st[s];
      rem %= tst[pos];
      ++pos;
    }
  }

  ComplexMatrix out = ComplexMatrix::Zero(nk, nk);
  for (std::size_t r = 0; r < nk; ++r)
    for (std::size_t c = 0; c < nk; ++c) {
      Complex acc = 0.0;
      for (std::size_t b = 0; b < nt; ++b) acc += m(kept_off[r] + traced_off[b], kept_off[c] + traced_off[b]);
      out(r, c) = acc;
    }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& state, std::span<const std::size_t> dims,
                                   std::vector<std::size_t> keep) {
  return DensityMatrix(partial_trace(state.matrix(), dims, std::move(keep)));
}

/// Reorders tensor factors: factor j of the result is factor order[j] of the input.
inline ComplexMatrix permute_subsystems(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                        std::span<const std::size_t> order) {
  const std::size_t n = product(dims);
  if (order.size() != dims.size() || m.rows() != static_cast<Eigen::Index>(n) || m.cols() != m.rows())
    throw std::invalid_argument("permute_subsystems: dimension mismatch");
  Dims seen(order.begin(), order.end());
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != i) throw std::invalid_argument("permute_subsystems: order is not a permutation");

  Dims new_dims(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j) new_dims[j] = dims[order[j]];
  const Dims old_st = strides(dims);
  const Dims new_st = strides(new_dims);
  std::vector<std::size_t> map(n);  // new index -> old index
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t rem = idx, old = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
      old += (rem / new_st[j]) * old_st[order[j]];
      rem %= new_st[j];
    }
    map[idx] = old;
  }
  ComplexMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) = m(map[r], map[c]);
  return out;
}

template <std::uniform_random_bit_generator Rng>
ComplexMatrix complex_gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexMatrix z(rows, cols);
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(r, c) = Complex(re, im);
    }
  return z;
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of
/// diag(R) moved into Q.
template <std::uniform_random_bit_generator Rng>
UnitaryMatrix haar_unitary(std::size_t dim, Rng& rng) {
  if (dim == 0) throw std::invalid_argument("haar_unitary: dim must be >= 1");
  const ComplexMatrix z = complex_gaussian(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (std::size_t j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    if (a > 0.0) q.col(j) *= d / a;
  }
  return UnitaryMatrix(std::move(q));
}

/// Normalized complex Gaussian vector; distributed as a Haar unitary's first column.
template <std::uniform_random_bit_generator Rng>
ComplexVector random_pure_ket(std::size_t dim, Rng& rng) {
  if (dim == 0) throw std::invalid_argument("random_pure_ket: dim must be >= 1");
  if (dim == 1) return ComplexVector::Ones(1);
  ComplexVector v = complex_gaussian(dim, 1, rng);
  return v / v.norm();
}

template <std::uniform_random_bit_generator Rng>
DensityMatrix random_pure_density(std::size_t dim, Rng& rng) {
  return DensityMatrix::pure(random_pure_ket(dim, rng));
}

inline ComplexVector basis_ket(std::size_t dim, std::size_t k) {
  ComplexVector v = ComplexVector::Zero(dim);
  v(k) = 1.0;
  return v;
}

}  // namespace qci
