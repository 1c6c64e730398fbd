#include <gtest/gtest.h>

#include <algorithm>

#include "gdiss/presets.hpp"
#include "gdiss/synthesis.hpp"
#include "support/oracles.hpp"

using namespace gdiss;

namespace {

std::vector<Complex> sorted(std::vector<Complex> v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    return std::abs(a.real() - b.real()) > 1e-9 ? a.real() > b.real() : a.imag() > b.imag();
  });
  return v;
}

}  // namespace

TEST(SynthesisParams, ValidatesSymmetry) {
  const ComplexMatrix p = ComplexMatrix::Identity(2, 2);
  RealMatrix r = RealMatrix::Zero(2, 2);
  RealMatrix gamma = RealMatrix::Zero(2, 2);
  EXPECT_NO_THROW(SynthesisParams(p, r, gamma));
  r(0, 1) = 1.0;
  EXPECT_THROW(SynthesisParams(p, r, gamma), Error);
  r.setZero();
  gamma(0, 1) = gamma(1, 0) = 1.0;
  EXPECT_THROW(SynthesisParams(p, r, gamma), Error);
  EXPECT_THROW(SynthesisParams(p, RealMatrix::Zero(3, 3), RealMatrix::Zero(2, 2)), Error);
}

TEST(Synthesis, CavityHandComputation) {
  // kappa = 2, detuning 0.3: C = (1, i), A = [[-1, -0.3], [0.3, -1]], D = I.
  const PresetSpec cav = cavity_preset(2.0, 0.3);
  const SystemRealization sys = assemble(cav.params, cav.graph);
  EXPECT_LT(std::abs(sys.C(0, 0) - Complex(1, 0)), 1e-15);
  EXPECT_LT(std::abs(sys.C(0, 1) - Complex(0, 1)), 1e-15);
  RealMatrix a(2, 2);
  a << -1.0, -0.3, 0.3, -1.0;
  EXPECT_LT((sys.A - a).norm(), 1e-15);
  EXPECT_LT((sys.D - RealMatrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_TRUE(sys.rank_ok);
}

TEST(Synthesis, HamiltonianMatrixIsSymmetricAndSatisfiesNullifierIdentity) {
  for (const auto& c : oracle::random_valid_cases(101, 20)) {
    const SystemRealization sys = assemble(c.params, c.graph);
    EXPECT_LT((sys.G - sys.G.transpose()).norm(), 1e-12 * std::max(1.0, sys.G.norm()));
    EXPECT_LE(verify_G_condition(sys, c.graph), G_condition_tolerance(sys));
  }
}

TEST(Synthesis, CorruptedHamiltonianBreaksNullifierIdentity) {
  const PresetSpec cav = cavity_preset(2.0);
  RealMatrix g(2, 2);
  g << 1e-3, 0.0, 0.0, 2e-3;
  const SystemRealization sys = assemble_with_G(cav.params, cav.graph, g);
  EXPECT_GT(verify_G_condition(sys, cav.graph), 1e-4);
}

TEST(Synthesis, DiffusionIsPositiveSemidefinite) {
  for (const auto& c : oracle::random_valid_cases(103, 20)) {
    const SystemRealization sys = assemble(c.params, c.graph);
    EXPECT_GE(oracle::symmetric_eigenvalues(sys.D).minCoeff(), -1e-12 * sys.D.norm());
  }
}

TEST(Synthesis, DriftSpectrumIsNullifierSpectrumAndItsConjugate) {
  for (const auto& c : oracle::random_valid_cases(107, 12)) {
    const SystemRealization sys = assemble(c.params, c.graph);
    const ComplexMatrix m = build_Q(c.params, c.graph).transpose() -
                            c.graph.Y().cast<Complex>() * c.params.P().conjugate() *
                                c.params.P().transpose();
    std::vector<Complex> expected;
    const Eigen::VectorXcd em = Eigen::ComplexEigenSolver<ComplexMatrix>(m).eigenvalues();
    for (Eigen::Index k = 0; k < em.size(); ++k) {
      expected.push_back(em(k));
      expected.push_back(std::conj(em(k)));
    }
    const auto got = sorted(eigenvalues_real(sys.A).eigenvalues);
    expected = sorted(expected);
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_LT(std::abs(got[k] - expected[k]), 1e-7 * std::max(1.0, std::abs(got[k])));
    }
  }
}

TEST(RankCondition, ZeroCouplingAndInvertibleCoupling) {
  const ComplexMatrix q = ComplexMatrix::Zero(3, 3);
  EXPECT_FALSE(rank_condition(ComplexMatrix::Zero(3, 2), q).satisfied);
  EXPECT_TRUE(rank_condition(ComplexMatrix::Identity(3, 3), q).satisfied);
  // A single channel can reach every mode through a cyclic Q.
  ComplexMatrix shift = ComplexMatrix::Zero(3, 3);
  shift(1, 0) = shift(2, 1) = 1.0;
  ComplexMatrix e1 = ComplexMatrix::Zero(3, 1);
  e1(0, 0) = 1.0;
  const RankCondition rc = rank_condition(e1, shift);
  EXPECT_TRUE(rc.satisfied);
  EXPECT_EQ(rc.rank, 3);
  EXPECT_FALSE(rank_condition(e1, q).satisfied);
}

TEST(RankCondition, ConstructedDeficientCasesFail) {
  for (const auto& c : oracle::rank_deficient_cases(29)) {
    EXPECT_FALSE(rank_condition(c.params.P(), build_Q(c.params, c.graph)).satisfied);
  }
}

TEST(SteadyState, RandomCasesCertifyAgainstClosedForm) {
  for (const auto& c : oracle::random_valid_cases(109, 20)) {
    const SystemRealization sys = assemble(c.params, c.graph);
    const SteadyStateCertificate cert = certify_steady_state(sys, c.graph);
    EXPECT_TRUE(cert.passed());
    const RealMatrix expected = oracle::pure_covariance(c.graph.X(), c.graph.Y());
    EXPECT_LT((oracle::lyapunov(sys.A, sys.D) - expected).norm(),
              1e-8 * std::max(1.0, expected.norm()));
  }
}

TEST(SteadyState, ZeroCouplingHasNoCertificate) {
  const GraphMatrix g = GraphMatrix::vacuum(2);
  const SynthesisParams p(ComplexMatrix::Zero(2, 2), RealMatrix::Zero(2, 2),
                          RealMatrix::Zero(2, 2));
  const SystemRealization sys = assemble(p, g);
  EXPECT_FALSE(sys.rank_ok);
  EXPECT_THROW(certify_steady_state(sys, g), NotHurwitzError);
}

TEST(Synthesis, DriftAndDiffusionScaleQuadraticallyWithCoupling) {
  oracle::Generator gen(113);
  const GraphMatrix g = gen.graph(3);
  const ComplexMatrix p = gen.complex(3, 3);
  const RealMatrix zero = RealMatrix::Zero(3, 3);
  const SystemRealization base = assemble(SynthesisParams(p, zero, zero), g);
  const double c = 1.7;
  const SystemRealization scaled = assemble(SynthesisParams(c * p, zero, zero), g);
  EXPECT_LT((scaled.A - c * c * base.A).norm(), 1e-12 * std::max(1.0, scaled.A.norm()));
  EXPECT_LT((scaled.D - c * c * base.D).norm(), 1e-12 * std::max(1.0, scaled.D.norm()));
}

TEST(Synthesis, RejectsMismatchedDimensions) {
  const GraphMatrix g = GraphMatrix::vacuum(2);
  const SynthesisParams p(ComplexMatrix::Identity(3, 3), RealMatrix::Zero(3, 3),
                          RealMatrix::Zero(3, 3));
  EXPECT_THROW(assemble(p, g), Error);
}
