// spinboson.hpp: two qubits dephased by a common oscillator bath: decoherence
// functions, bath CI, the double-quantum-dot black-body model, entanglement of
// formation and space-time grids

#pragma once

#include "qci/causality.hpp"
#include "qci/parallel.hpp"
#include "qci/special.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace qci {

/// Eigenvalues of the system operators S^A, S^B coupled to the bath.
struct CouplingAgents {
  double a0 = 0.5, a1 = -0.5, b0 = 0.5, b1 = -0.5;

  double delta_a() const { return a0 - a1; }
  double delta_b() const { return b0 - b1; }

  void validate() const {
    for (double v : {a0, a1, b0, b1})
      if (!std::isfinite(v)) throw std::invalid_argument("coupling agents must be finite");
  }
};

/// Discrete oscillator bath, hbar = 1.
struct BathModeSum {
  std::vector<double> g;
  std::vector<double> omega;
  std::vector<double> nbar;
  double mass = 1.0;

  void validate() const {
    if (g.size() != omega.size() || g.size() != nbar.size())
      throw std::invalid_argument("bath mode lists must have equal length");
    if (!(mass > 0.0)) throw std::invalid_argument("bath mass must be positive");
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!(omega[k] > 0.0)) throw std::invalid_argument("bath frequencies must be positive");
      if (!(nbar[k] >= 0.0)) throw std::invalid_argument("thermal occupations must be >= 0");
    }
  }
};

struct BathFunctions {
  double phi = 0.0;
  double f = 0.0;
};

/// phi(t) = sum_k g_k^2 / (2 m w_k^2) (t - sin(w_k t)/w_k)
/// f(t)   = sum_k g_k^2 (1 + 2 n_k) / (2 m w_k^3) (1 - cos(w_k t))
inline BathFunctions bath_functions(const BathModeSum& bath, double t) {
  bath.validate();
  BathFunctions out;
  for (std::size_t k = 0; k < bath.g.size(); ++k) {
    const double w = bath.omega[k];
    const double g2 = bath.g[k] * bath.g[k];
    out.phi += g2 / (2.0 * bath.mass * w * w) * (t - std::sin(w * t) / w);
    // 1 - cos(wt) = 2 sin^2(wt/2) keeps precision near t = 0
    const double s = std::sin(0.5 * w * t);
    out.f += g2 * (1.0 + 2.0 * bath.nbar[k]) / (2.0 * bath.mass * w * w * w) * (2.0 * s * s);
  }
  return out;
}

/// (4/3) sin^2(da db phi) exp(-2 da^2 f) for BtoA; AtoB exchanges a and b.
inline double bath_ci(const CouplingAgents& agents, double phi, double f, Direction direction) {
  agents.validate();
  const double da = agents.delta_a(), db = agents.delta_b();
  const double damp = direction == Direction::kBtoA ? da : db;
  const double s = std::sin(da * db * phi);
  return 4.0 / 3.0 * s * s * std::exp(-2.0 * damp * damp * f);
}

/// Two-qubit map rho_xy -> rho_xy exp[i phi (s_x^2 - s_y^2) - f (s_x - s_y)^2],
/// s_(ij) = a_i + b_j, as Kraus operators sqrt(lambda) diag(v) from the
/// eigendecomposition of the (positive) multiplier matrix.
inline Channel dephasing_channel(const CouplingAgents& agents, double phi, double f) {
  agents.validate();
  if (!std::isfinite(phi) || !std::isfinite(f)) throw std::invalid_argument("dephasing: phi and f must be finite");
  if (f < 0.0) throw std::invalid_argument("dephasing: f must be >= 0");
  const std::array<double, 4> s{agents.a0 + agents.b0, agents.a0 + agents.b1, agents.a1 + agents.b0,
                                agents.a1 + agents.b1};
  ComplexMatrix m(4, 4);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) {
      const double ds = s[x] - s[y];
      m(x, y) = std::exp(Complex(-f * ds * ds, phi * (s[x] * s[x] - s[y] * s[y])));
    }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  std::vector<ComplexMatrix> ops;
  for (int e = 0; e < 4; ++e) {
    const double lam = es.eigenvalues()(e);
    if (lam < tolerance::kPsdFloor)
      throw InvariantError("dephasing.multiplier_psd", "eigenvalue " + std::to_string(lam));
    if (lam <= 0.0) continue;
    ops.push_back((std::sqrt(lam) * es.eigenvectors().col(e)).asDiagonal().toDenseMatrix());
  }
  try {
    return Channel::kraus(std::move(ops), SystemDims::bipartite(2, 2));
  } catch (const InvariantError& e) {
    throw InvariantError("dephasing.kraus_closure", e.what());
  }
}

/// Dephasing in the continuum black-body model. Times are in units of
/// tau = hbar / (k_B T).
struct DQDParams {
  double amplitude = 0.0;   // A = alpha d^2 / (pi c^2 tau^2)
  double y_max = 0.0;       // y_m = omega_max tau
  double t0 = 1.0;          // light travel time between the dots
  double f_exponent = 0.0;  // -da^2 f, constant; exp(2 f_exponent) is the CI damping

  void validate() const {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw std::invalid_argument("DQD: A must be >= 0");
    if (!(y_max > 0.0) || !std::isfinite(y_max)) throw std::invalid_argument("DQD: y_m must be > 0");
    if (!(t0 >= 0.0) || !std::isfinite(t0)) throw std::invalid_argument("DQD: t0 must be >= 0");
    if (!std::isfinite(f_exponent) || f_exponent > 0.0) throw std::invalid_argument("DQD: f_exponent must be <= 0");
  }
};

namespace constants {
inline constexpr double kHbar = 1.054571817e-34;       // J s
inline constexpr double kBoltzmann = 1.380649e-23;     // J / K
inline constexpr double kLightSpeed = 299792458.0;     // m / s
inline constexpr double kFineStructure = 7.2973525693e-3;
inline constexpr double kElectronVolt = 1.602176634e-19;  // J
}  // namespace constants

struct PhysicalParams {
  double dipole_nm = 10.0;
  double temperature_k = 2.73;
  double hbar_omega_max_ev = 1.0;
};

struct DerivedDQD {
  DQDParams params;  // t0 left at its default
  double tau_s = 0.0;
};

inline DerivedDQD dqd_from_physical(const PhysicalParams& p) {
  using namespace constants;
  if (!(p.dipole_nm > 0.0) || !(p.temperature_k > 0.0) || !(p.hbar_omega_max_ev > 0.0))
    throw std::invalid_argument("physical DQD parameters must be positive");
  const double d = p.dipole_nm * 1e-9;
  const double tau = kHbar / (kBoltzmann * p.temperature_k);
  const double omega = p.hbar_omega_max_ev * kElectronVolt / kHbar;
  DerivedDQD out;
  out.tau_s = tau;
  out.params.amplitude = kFineStructure * d * d / (std::numbers::pi * kLightSpeed * kLightSpeed * tau * tau);
  out.params.y_max = omega * tau;
  // total CI exponent -alpha d^2 omega^2 / (3 c^2), split as 2 * f_exponent
  out.params.f_exponent = -kFineStructure * d * d * omega * omega / (6.0 * kLightSpeed * kLightSpeed);
  return out;
}

/// da db phi(t) for the black-body continuum:
///   (A t / t0^3) {2[Si(y t0) - sin(y t0)] + Si[y (t - t0)] - Si[y (t + t0)]}
///   + (2 A / (y t0^3)) sin(y t) sin(y t0)
inline double dqd_phase_arg(const DQDParams& p, double t) {
  p.validate();
  if (!(p.t0 > 0.0)) throw std::invalid_argument("DQD: t0 must be > 0 (formula is singular at t0 = 0)");
  if (!std::isfinite(t)) throw std::invalid_argument("DQD: t must be finite");
  if (t < 0.0) return -dqd_phase_arg(p, -t);
  const double y = p.y_max, t0 = p.t0;
  const double t03 = t0 * t0 * t0;
  const double bracket = 2.0 * sine_integral_minus_sin(y * t0) + sine_integral(y * (t - t0)) -
                         sine_integral(y * (t + t0));
  return p.amplitude * t / t03 * bracket + 2.0 * p.amplitude / (y * t03) * std::sin(y * t) * std::sin(y * t0);
}

inline double dqd_ci(const DQDParams& p, double t) {
  const double s = std::sin(dqd_phase_arg(p, t));
  return 4.0 / 3.0 * s * s * std::exp(2.0 * p.f_exponent);
}

/// Spin-flip concurrence, from the eigenvalues of sqrt(rho) rho~ sqrt(rho).
inline double concurrence(const DensityMatrix& state) {
  if (state.dim() != 4) throw std::invalid_argument("concurrence: two-qubit (4x4) state required");
  const ComplexMatrix& rho = state.matrix();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix root = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  ComplexMatrix yy = ComplexMatrix::Zero(4, 4);
  yy(0, 3) = yy(3, 0) = -1.0;
  yy(1, 2) = yy(2, 1) = 1.0;
  const ComplexMatrix tilde = yy * rho.conjugate() * yy;
  const ComplexMatrix h = root * tilde * root;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> hs(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  Eigen::Vector4d l = hs.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::sort(l.data(), l.data() + 4, std::greater<>());
  return std::max(0.0, l(0) - l(1) - l(2) - l(3));
}

inline double binary_entropy(double x) {
  auto term = [](double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; };
  return term(x) + term(1.0 - x);
}

/// Entanglement of formation h((1 + sqrt(1 - C^2)) / 2).
inline double eof(const DensityMatrix& state) {
  const double c = std::min(1.0, concurrence(state));
  // (1 - sqrt(1 - c^2)) / 2 written without cancellation
  const double small = c * c / (2.0 * (1.0 + std::sqrt(1.0 - c * c)));
  return std::clamp(binary_entropy(small), 0.0, 1.0);
}

struct GridSpec {
  double t_lo = 1e-6, t_hi = 1e30;
  double t0_lo = 1e-6, t0_hi = 1e6;
  std::size_t n = 51;
  bool log_t = true;
  bool log_t0 = true;

  void validate() const {
    if (!(t_lo > 0.0 && t_hi > t_lo && t0_lo > 0.0 && t0_hi > t0_lo))
      throw std::invalid_argument("grid ranges must be positive and increasing");
    if (n < 2) throw std::invalid_argument("grid resolution must be >= 2");
  }
};

inline std::vector<double> axis(double lo, double hi, std::size_t n, bool logarithmic) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = logarithmic ? std::pow(10.0, std::log10(lo) + u * (std::log10(hi) - std::log10(lo)))
                         : lo + u * (hi - lo);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// Rows index t, columns index t0.
struct SpaceTimeGrid {
  std::vector<double> t;
  std::vector<double> t0;
  Eigen::MatrixXd ci;
  Eigen::MatrixXd eof;
  Eigen::MatrixXd delta;  // lambda ci - eof, filled by fit_lambda
};

/// |+> (x) |+>.
inline DensityMatrix plus_plus_state() {
  ComplexVector v = ComplexVector::Constant(4, 0.5);
  return DensityMatrix::pure(v);
}

struct GridOptions {
  CouplingAgents agents{};
  unsigned threads = 0;
};

inline SpaceTimeGrid spacetime_grid(const DQDParams& base, const GridSpec& spec,
                                    const DensityMatrix& initial = plus_plus_state(), const GridOptions& opt = {}) {
  base.validate();
  spec.validate();
  if (initial.dim() != 4) throw std::invalid_argument("grid: initial state must be a two-qubit state");
  const double da = opt.agents.delta_a(), db = opt.agents.delta_b();
  if (da == 0.0 || db == 0.0) throw std::invalid_argument("grid: coupling agents must have nonzero gaps");

  SpaceTimeGrid g;
  g.t = axis(spec.t_lo, spec.t_hi, spec.n, spec.log_t);
  g.t0 = axis(spec.t0_lo, spec.t0_hi, spec.n, spec.log_t0);
  const auto n = static_cast<Eigen::Index>(spec.n);
  g.ci.resize(n, n);
  g.eof.resize(n, n);
  g.delta = Eigen::MatrixXd::Zero(n, n);

  struct Row {
    std::vector<double> ci, eof;
  };
  const double f = -base.f_exponent / (da * da);
  const auto rows = parallel_map<Row>(spec.n, opt.threads, [&](std::size_t r) {
    Row row;
    for (std::size_t c = 0; c < spec.n; ++c) {
      DQDParams p = base;
      p.t0 = g.t0[c];
      const double arg = dqd_phase_arg(p, g.t[r]);
      const double s = std::sin(arg);
      row.ci.push_back(4.0 / 3.0 * s * s * std::exp(2.0 * p.f_exponent));
      const Channel ch = dephasing_channel(opt.agents, arg / (da * db), f);
      row.eof.push_back(eof(DensityMatrix(ch.apply(initial.matrix()))));
    }
    return row;
  });
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      g.ci(r, c) = rows[r].ci[c];
      g.eof(r, c) = rows[r].eof[c];
    }
  return g;
}

struct LambdaFit {
  double lambda = 0.0;
  double max_abs_residual = 0.0;
};

/// Least squares lambda = sum(I E) / sum(I^2); stores delta = lambda I - E.
inline LambdaFit fit_lambda(SpaceTimeGrid& grid) {
  if (grid.ci.size() == 0 || grid.ci.rows() != grid.eof.rows() || grid.ci.cols() != grid.eof.cols())
    throw std::invalid_argument("fit_lambda: empty or inconsistent grid");
  const double ii = grid.ci.squaredNorm();
  if (!(ii > 0.0)) throw std::invalid_argument("fit_lambda: CI vanishes on the whole grid");
  LambdaFit fit;
  fit.lambda = grid.ci.cwiseProduct(grid.eof).sum() / ii;
  grid.delta = fit.lambda * grid.ci - grid.eof;
  fit.max_abs_residual = grid.delta.cwiseAbs().maxCoeff();
  return fit;
}

}  // namespace qci
