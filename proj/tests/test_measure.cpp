#include "oracles.hpp"
#include "qci/gates.hpp"
#include "qci/measure.hpp"

#include <gtest/gtest.h>

using namespace qci;

namespace {

Channel on(const UnitaryMatrix& u, std::size_t da, std::size_t db, std::size_t dc) {
  return Channel::unitary(u, SystemDims::bipartite(da, db, dc));
}

double closed(const Channel& ch, Direction dir) { return ci_closed_form(ch, dir).value; }

std::size_t target_index(Direction dir) { return dir == Direction::kBtoA ? 0 : 1; }

}  // namespace

TEST(DTensor, QubitEntries) {
  const DTensor d = d_tensor(2);
  EXPECT_EQ(d(0, 1, 0, 1), 1);
  EXPECT_EQ(d(0, 0, 1, 1), -1);
  EXPECT_EQ(d(1, 1, 1, 1), 1);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t l = 0; l < 2; ++l) EXPECT_EQ(d(k, l, 0, 0), 0);
  EXPECT_THROW(d_tensor(1), std::invalid_argument);
}

TEST(DTensor, ConventionsAgreeForQubitsOnly) {
  const DTensor a(2), b(2, DerivativeConvention::kAsPrinted);
  for (std::size_t n = 0; n < 16; ++n) EXPECT_EQ(a(n >> 3, (n >> 2) & 1, (n >> 1) & 1, n & 1), b(n >> 3, (n >> 2) & 1, (n >> 1) & 1, n & 1));
  const DTensor c(3), p(3, DerivativeConvention::kAsPrinted);
  EXPECT_EQ(c(2, 2, 1, 1), 0);
  EXPECT_EQ(p(2, 2, 1, 1), 1);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = 0; l < 3; ++l)
      for (std::size_t h = 0; h < 3; ++h)
        for (std::size_t f = 0; f < 3; ++f) {
          EXPECT_EQ(c(k, l, h, f), oracle::d_entry(k, l, h, f));
          EXPECT_LE(std::abs(p(k, l, h, f)), 1);
        }
}

TEST(CiClosedForm, SmbFixture) {
  const Channel ch = on(gate(GateName::kSmb, {2, 2, 2}), 2, 2, 2);
  EXPECT_NEAR(closed(ch, Direction::kAtoB), 1.5, 1e-10);
  EXPECT_NEAR(closed(ch, Direction::kBtoA), 0.0, 1e-10);
}

TEST(CiClosedForm, CnotIsStrongerFromControl) {
  const Channel ch = on(gate(GateName::kCnot, {2, 2}), 2, 2, 1);
  EXPECT_NEAR(closed(ch, Direction::kAtoB), 4.0 / 3.0, 1e-10);
  EXPECT_NEAR(closed(ch, Direction::kBtoA), 2.0 / 3.0, 1e-10);
}

TEST(CiClosedForm, PermutationsAndLocalGates) {
  const Channel p = on(gate(GateName::kPerm123, {2, 2, 2}), 2, 2, 2);
  EXPECT_NEAR(closed(p, Direction::kAtoB), 4.0, 1e-10);
  EXPECT_NEAR(closed(p, Direction::kBtoA), 0.0, 1e-12);
  const Channel h = on(gate(GateName::kHadamard, {2, 2}), 2, 2, 1);
  EXPECT_NEAR(closed(h, Direction::kAtoB), 0.0, 1e-12);
  EXPECT_NEAR(closed(h, Direction::kBtoA), 0.0, 1e-12);
}

TEST(CiClosedForm, ResultFields) {
  const CIResult r = ci_closed_form(on(gate(GateName::kCnot, {2, 2}), 2, 2, 1), Direction::kBtoA);
  EXPECT_EQ(r.direction, "BtoA");
  EXPECT_EQ(r.method, Method::kClosedForm);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_EQ(r.samples, 0u);
}

TEST(CiClosedForm, MatchesFullDensityPropagation) {
  std::mt19937_64 rng(31);
  const std::vector<std::array<std::size_t, 3>> shapes{{2, 2, 2}, {3, 2, 2}, {2, 3, 1}, {3, 3, 1}};
  for (const auto& [da, db, dc] : shapes)
    for (int trial = 0; trial < 3; ++trial) {
      const UnitaryMatrix u = haar_unitary(da * db * dc, rng);
      const Channel ch = on(u, da, db, dc);
      for (Direction dir : {Direction::kAtoB, Direction::kBtoA})
        EXPECT_NEAR(closed(ch, dir), oracle::measure_by_propagation({u.matrix()}, da, db, dc, target_index(dir)), 1e-10);
    }
}

TEST(CiClosedForm, KrausChannelMatchesPropagation) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 5; ++trial) {
    const Channel dilated = on(haar_unitary(12, rng), 2, 2, 3);
    const Channel k = dilated.environment_traced();
    for (Direction dir : {Direction::kAtoB, Direction::kBtoA}) {
      const double v = closed(k, dir);
      EXPECT_NEAR(v, oracle::measure_by_propagation(k.operators(), 2, 2, 1, target_index(dir)), 1e-10);
      EXPECT_NEAR(v, closed(dilated, dir), 1e-10);
    }
  }
}

TEST(Properties, ZeroExactlyWhenNoInfluence) {
  std::mt19937_64 rng(33);
  std::vector<Channel> channels;
  for (const auto& [g, name] : kGateNames) {
    const bool three = g == GateName::kToffoli || g == GateName::kFredkin || g == GateName::kSmb ||
                       g == GateName::kPerm123 || g == GateName::kPerm132;
    channels.push_back(three ? on(gate(g, {2, 2, 2}), 2, 2, 2) : on(gate(g, {2, 2}), 2, 2, 1));
  }
  for (int n = 0; n < 100; ++n) channels.push_back(on(haar_unitary(8, rng), 2, 2, 2));
  for (const auto& ch : channels)
    for (Direction dir : {Direction::kAtoB, Direction::kBtoA}) {
      const bool influence = check_no_ci(ch, dir).influence;
      const double v = closed(ch, dir);
      EXPECT_EQ(influence, v > 1e-12) << v;
    }
}

TEST(Properties, LocalUnitariesOnInfluencedParty) {
  std::mt19937_64 rng(34);
  for (int n = 0; n < 100; ++n) {
    const UnitaryMatrix u = haar_unitary(8, rng);
    const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2), i4 = ComplexMatrix::Identity(4, 4);
    const ComplexMatrix post = tensor({haar_unitary(2, rng).matrix(), haar_unitary(2, rng).matrix(), i2});
    const ComplexMatrix pre = tensor({haar_unitary(2, rng).matrix(), i4});
    const UnitaryMatrix v(post * u.matrix() * pre);
    EXPECT_NEAR(closed(on(v, 2, 2, 2), Direction::kBtoA), closed(on(u, 2, 2, 2), Direction::kBtoA), 1e-9);
  }
}

TEST(Properties, PreRotationOnInfluencerChangesMeasure) {
  std::mt19937_64 rng(35);
  bool witness = false;
  for (int n = 0; n < 20 && !witness; ++n) {
    const UnitaryMatrix u = haar_unitary(8, rng);
    const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
    const UnitaryMatrix v(u.matrix() * tensor({i2, haar_unitary(2, rng).matrix(), i2}));
    witness = std::abs(closed(on(v, 2, 2, 2), Direction::kBtoA) - closed(on(u, 2, 2, 2), Direction::kBtoA)) > 1e-6;
  }
  EXPECT_TRUE(witness);
}

TEST(MonteCarlo, CnotWithinThreeSigma) {
  const Channel ch = on(gate(GateName::kCnot, {2, 2}), 2, 2, 1);
  for (Direction dir : {Direction::kAtoB, Direction::kBtoA}) {
    const CIResult r = ci_monte_carlo(ch, dir, {20000, 7, 0, {}});
    EXPECT_EQ(r.method, Method::kMonteCarlo);
    EXPECT_EQ(r.samples, 20000u);
    EXPECT_GT(r.std_error, 0.0);
    EXPECT_NEAR(r.value, closed(ch, dir), 3.0 * r.std_error);
  }
}

TEST(MonteCarlo, AgreesWithClosedFormOnRandomChannels) {
  std::mt19937_64 rng(36);
  int inside = 0;
  const int trials = 10;
  for (int n = 0; n < trials; ++n) {
    const Channel ch = on(haar_unitary(8, rng), 2, 2, 2);
    const CIResult r = ci_monte_carlo(ch, Direction::kBtoA, {20000, static_cast<std::uint64_t>(n), 0, {}});
    inside += std::abs(r.value - closed(ch, Direction::kBtoA)) <= 3.0 * r.std_error;
  }
  EXPECT_GE(inside, 8);
}

TEST(MonteCarlo, ConstantResponseHasZeroSpread) {
  // for a product unitary the target response does not depend on the sampled state
  const Channel ch = on(UnitaryMatrix::identity(4), 2, 2, 1);
  const CIResult r = ci_monte_carlo(ch, Direction::kBtoA, {1000, 1, 1, {}});
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.std_error, 0.0);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  std::mt19937_64 rng(37);
  const Channel ch = on(haar_unitary(8, rng), 2, 2, 2);
  const CIResult a = ci_monte_carlo(ch, Direction::kAtoB, {5000, 99, 1, {}});
  const CIResult b = ci_monte_carlo(ch, Direction::kAtoB, {5000, 99, 3, {}});
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_THROW(ci_monte_carlo(ch, Direction::kAtoB, {10, 0, 1, {}}), std::invalid_argument);
}

TEST(ExpectedCi, AnchorsAreExactRationals) {
  EXPECT_EQ(expected_ci(2, 2, 2, Direction::kBtoA), Rational(16, 21));
  EXPECT_EQ(expected_ci(3, 2, 2, Direction::kBtoA), Rational(128, 143));
  EXPECT_EQ(expected_ci(2, 3, 2, Direction::kAtoB), Rational(128, 143));
  EXPECT_THROW(expected_ci(1, 2, 2, Direction::kBtoA), std::invalid_argument);
}

TEST(ExpectedCi, Asymptotics) {
  // E * d_C -> 2(d_B - 1)(1 - 1/d_A^2) for d_B = 2
  EXPECT_NEAR(to_double(expected_ci(10, 2, 50, Direction::kBtoA)) * 50.0, 2.0, 0.05 * 2.0);
  // E * d_A -> (d_B - 1)(d_B - 2)^2 as d_C grows
  EXPECT_NEAR(to_double(expected_ci(3, 4, 100, Direction::kBtoA)) * 3.0, 12.0, 0.05 * 12.0);
}

TEST(ExpectedCi, StrictlyIncreasingInInfluencerDimension) {
  for (std::size_t da : {2u, 3u})
    for (std::size_t dc : {1u, 2u, 4u}) {
      Rational prev = expected_ci(da, 2, dc, Direction::kBtoA);
      for (std::size_t db = 3; db <= 8; ++db) {
        const Rational cur = expected_ci(da, db, dc, Direction::kBtoA);
        EXPECT_GT(cur, prev) << da << " " << db << " " << dc;
        prev = cur;
      }
    }
}

TEST(ExpectedCi, HaarAverageOfPrintedConvention) {
  // for an influencer of dimension 3 the closed expectation is the Haar mean of the printed D
  const SystemDims dims = SystemDims::bipartite(2, 3, 1);
  HistogramOptions opt;
  opt.samples = 3000;
  opt.seed = 5;
  opt.convention = DerivativeConvention::kAsPrinted;
  const HistogramSummary h = histogram(dims, opt);
  const double expect = to_double(expected_ci(2, 3, 1, Direction::kBtoA));
  EXPECT_NEAR(h.mean, expect, 4.0 * h.std_dev / std::sqrt(3000.0));
}

TEST(ExpectedCi, HaarAverageAtQubitInfluencer) {
  HistogramOptions opt;
  opt.samples = 2000;
  opt.seed = 6;
  const HistogramSummary h = histogram(SystemDims::bipartite(3, 2, 2), opt);
  EXPECT_NEAR(h.mean, to_double(expected_ci(3, 2, 2, Direction::kBtoA)), 4.0 * h.std_dev / std::sqrt(2000.0));
}

TEST(HaarMoment2, EqualsWeingartenSumExhaustively) {
  for (std::size_t d = 1; d <= 4; ++d) {
    const std::size_t n = d * d * d * d;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        MomentQuery mq;
        mq.dim = d;
        mq.p = {a % d, (a / d) % d};
        mq.q = {(a / (d * d)) % d, a / (d * d * d)};
        mq.r = {b % d, (b / d) % d};
        mq.s = {(b / (d * d)) % d, b / (d * d * d)};
        ASSERT_EQ(haar_moment2(mq), oracle::weingarten2(mq.p, mq.q, mq.r, mq.s, static_cast<std::int64_t>(d)));
      }
  }
}

TEST(HaarMoment2, NamedPatterns) {
  for (std::int64_t d = 2; d <= 4; ++d)
    for (const auto& m : oracle::moment_patterns())
      EXPECT_EQ(haar_moment2({m.p, m.q, m.r, m.s, static_cast<std::size_t>(d)}), m.value(d)) << m.name;
  EXPECT_EQ(haar_moment2({{0, 1}, {0, 1}, {0, 1}, {1, 0}, 2}), Rational(-1, 6));
  EXPECT_EQ(haar_moment2({{0, 0}, {0, 0}, {0, 0}, {0, 0}, 1}), Rational(1));
}

TEST(HaarMoment2, MatchesSampling) {
  std::mt19937_64 rng(38);
  for (std::size_t d : {2u, 3u}) {
    std::vector<SampleStats> re(5), im(5);
    for (int n = 0; n < 20000; ++n) {
      const ComplexMatrix u = haar_unitary(d, rng).matrix();
      for (std::size_t k = 0; k < 5; ++k) {
        const Complex x = oracle::moment_sample(u, oracle::moment_patterns()[k]);
        re[k].add(x.real());
        im[k].add(x.imag());
      }
    }
    for (std::size_t k = 0; k < 5; ++k) {
      const auto& m = oracle::moment_patterns()[k];
      const double exact = to_double(haar_moment2({m.p, m.q, m.r, m.s, d}));
      EXPECT_NEAR(re[k].mean, exact, 3.0 * re[k].std_error()) << m.name << " D=" << d;
      EXPECT_NEAR(im[k].mean, 0.0, 3.0 * im[k].std_error() + 1e-15) << m.name << " D=" << d;
    }
  }
}

TEST(HaarMoment2, IndexOutOfRange) {
  EXPECT_THROW(haar_moment2({{0, 2}, {0, 0}, {0, 0}, {0, 0}, 2}), std::invalid_argument);
  EXPECT_THROW(haar_moment2({{0, 0}, {0, 0}, {0, 0}, {0, 0}, 0}), std::invalid_argument);
}

TEST(Histogram, SummaryAndBins) {
  HistogramOptions opt;
  opt.samples = 1000;
  opt.seed = 3;
  opt.threads = 1;
  const HistogramSummary h = histogram(SystemDims::bipartite(2, 2, 2), opt);
  EXPECT_EQ(h.samples, 1000u);
  EXPECT_EQ(h.values.size(), 1000u);
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, 1000u);
  EXPECT_NEAR(h.bin_width * static_cast<double>(h.counts.size()),
              std::max(1.0, std::ceil(*std::max_element(h.values.begin(), h.values.end()))), 1e-12);
  opt.threads = 4;
  const HistogramSummary h4 = histogram(SystemDims::bipartite(2, 2, 2), opt);
  EXPECT_EQ(h.values, h4.values);
  EXPECT_EQ(h.mean, h4.mean);
  opt.samples = 50;
  EXPECT_THROW(histogram(SystemDims::bipartite(2, 2, 2), opt), std::invalid_argument);
}

TEST(NParty, TwoPartiesReproduceBipartiteExactly) {
  for (const auto& [g, name] : kGateNames) {
    const bool three = g == GateName::kToffoli || g == GateName::kFredkin || g == GateName::kSmb ||
                       g == GateName::kPerm123 || g == GateName::kPerm132;
    const Channel ch = three ? on(gate(g, {2, 2, 2}), 2, 2, 2) : on(gate(g, {2, 2}), 2, 2, 1);
    for (Direction dir : {Direction::kAtoB, Direction::kBtoA}) {
      const auto pp = parties_of(dir);
      EXPECT_EQ(ci_nparty(ch, pp.source, pp.target).value, closed(ch, dir)) << name;
    }
  }
}

TEST(NParty, IdentityIsZero) {
  const Channel ch = Channel::unitary(UnitaryMatrix::identity(8), SystemDims::nparty_from(Dims{2, 2, 2, 1}));
  EXPECT_EQ(ci_nparty(ch, 0, 2).value, 0.0);
  EXPECT_EQ(ci_nparty(ch, 2, 1).direction, "2to1");
  EXPECT_THROW(ci_nparty(ch, 1, 1), std::invalid_argument);
}

TEST(NParty, PermutationPairMatchesSampling) {
  const Channel ch = Channel::unitary(gate(GateName::kPerm123, {2, 2, 2}), SystemDims::nparty_from(Dims{2, 2, 2, 1}));
  const double exact = ci_nparty(ch, 1, 2).value;
  EXPECT_GT(exact, 0.1);
  const CIResult mc = ci_monte_carlo_nparty(ch, 1, 2, {}, {20000, 4, 0, {}});
  EXPECT_NEAR(mc.value, exact, 3.0 * mc.std_error + 1e-12);
  EXPECT_NEAR(ci_nparty(ch, 2, 1).value, 0.0, 1e-12);
}

TEST(Switch, EndpointsReproduceComponentGates) {
  const SystemDims comp = SystemDims::bipartite(2, 2, 2);
  const UnitaryMatrix first = gate(GateName::kPerm123, {2, 2, 2}), second = gate(GateName::kPerm132, {2, 2, 2});
  const SystemDims sd = switch_dims(comp);
  auto at = [&](double theta) { return Channel::unitary(switched_evolution(first, second, comp, {theta, 0.0}), sd); };
  const Channel c1 = on(first, 2, 2, 2), c2 = on(second, 2, 2, 2);
  for (Direction dir : {Direction::kAtoB, Direction::kBtoA}) {
    EXPECT_NEAR(closed(at(0.0), dir), closed(c1, dir), 1e-9);
    EXPECT_NEAR(closed(at(std::numbers::pi), dir), closed(c2, dir), 1e-9);
  }
  EXPECT_GT(closed(at(1.1), Direction::kAtoB), 1e-3);
  EXPECT_GT(closed(at(1.1), Direction::kBtoA), 1e-3);
}
