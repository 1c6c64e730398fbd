#pragma once

// Reference computations and case generators shared by the unit tests and
// the acceptance binary. Oracles deliberately avoid the library's own code
// paths: closed forms where one exists, Eigen's stock solvers otherwise.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <random>
#include <vector>

#include "gdiss/gdiss.hpp"

namespace oracle {

using gdiss::Complex;
using gdiss::ComplexMatrix;
using gdiss::GraphMatrix;
using gdiss::RealMatrix;
using gdiss::SynthesisParams;

/// V = 1/2 [[Y^-1, Y^-1 X], [X Y^-1, Y + X Y^-1 X]], expanded by hand from
/// S S^T / 2.
inline RealMatrix pure_covariance(const RealMatrix& x, const RealMatrix& y) {
  const auto n = x.rows();
  const RealMatrix yi = y.inverse();
  RealMatrix v(2 * n, 2 * n);
  v.topLeftCorner(n, n) = yi;
  v.topRightCorner(n, n) = yi * x;
  v.bottomLeftCorner(n, n) = x * yi;
  v.bottomRightCorner(n, n) = y + x * yi * x;
  return 0.5 * v;
}

/// Solves A V + V A^T + D = 0 through the eigendecomposition A = U L U^-1:
/// W = U^-1 D U^-H, V_ij = -W_ij / (l_i + conj l_j), V = U W U^H.
inline RealMatrix lyapunov(const RealMatrix& a, const RealMatrix& d) {
  const Eigen::EigenSolver<RealMatrix> es(a);
  const ComplexMatrix u = es.eigenvectors();
  const Eigen::VectorXcd l = es.eigenvalues();
  const ComplexMatrix ui = u.inverse();
  ComplexMatrix w = ui * d.cast<Complex>() * ui.adjoint();
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = -w(i, j) / (l(i) + std::conj(l(j)));
  return (u * w * u.adjoint()).real();
}

/// Annihilation-port block of the full input-output map,
/// F(w) = I + C (i w - A)^{-1} (-i Sigma C^dagger), built from (A, C) alone.
inline ComplexMatrix full_transfer(const RealMatrix& a, const ComplexMatrix& c, double omega) {
  const auto dim = a.rows();
  const auto m = c.rows();
  const ComplexMatrix sigma = gdiss::symplectic_form(static_cast<int>(dim / 2)).cast<Complex>();
  const ComplexMatrix res =
      (Complex(0, omega) * ComplexMatrix::Identity(dim, dim) - a.cast<Complex>()).inverse();
  return ComplexMatrix::Identity(m, m) + c * res * (Complex(0, -1) * sigma * c.adjoint());
}

/// Same block for an arbitrary coupling C = (C_x, C_p) with the drift it
/// induces for zero Hamiltonian. Non-passive couplings break unitarity.
inline ComplexMatrix raw_coupling_transfer(const ComplexMatrix& c, double omega) {
  const auto dim = c.cols();
  const ComplexMatrix sigma = gdiss::symplectic_form(static_cast<int>(dim / 2)).cast<Complex>();
  const ComplexMatrix cc = c.adjoint() * c;
  const RealMatrix a = (sigma * ComplexMatrix(cc.imag().cast<Complex>())).real();
  return full_transfer(a, c, omega);
}

inline double unitarity_dev(const ComplexMatrix& f) {
  return (f.adjoint() * f - ComplexMatrix::Identity(f.cols(), f.cols())).norm();
}

/// Eigenvalues of a symmetric matrix from Eigen's stock solver, ascending.
inline Eigen::VectorXd symmetric_eigenvalues(const RealMatrix& s) {
  return Eigen::SelfAdjointEigenSolver<RealMatrix>(s).eigenvalues();
}

// ---------------------------------------------------------------------------
// Case generators

struct Case {
  GraphMatrix graph;
  SynthesisParams params;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  double normal() { return dist_(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<>(lo, hi)(rng_); }

  RealMatrix gaussian(int r, int c) {
    RealMatrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal();
    return m;
  }

  RealMatrix symmetric(int n) {
    const RealMatrix w = gaussian(n, n);
    return 0.5 * (w + w.transpose());
  }

  RealMatrix skew(int n) {
    const RealMatrix w = gaussian(n, n);
    return 0.5 * (w - w.transpose());
  }

  RealMatrix spd(int n) {
    const RealMatrix w = gaussian(n, n);
    return w.transpose() * w / n + 0.2 * RealMatrix::Identity(n, n);
  }

  ComplexMatrix complex(int r, int c) {
    ComplexMatrix m(r, c);
    m.real() = gaussian(r, c);
    m.imag() = gaussian(r, c);
    return m;
  }

  GraphMatrix graph(int n) { return GraphMatrix(symmetric(n), spd(n)); }

  /// Random (X, Y, P, R, Gamma) satisfying the rank condition.
  Case valid_case(int n, int m) {
    for (;;) {
      GraphMatrix g = graph(n);
      SynthesisParams p(complex(n, m), symmetric(n), skew(n));
      if (gdiss::rank_condition(p.P(), gdiss::build_Q(p, g)).satisfied) return {g, p};
    }
  }

  /// Random case whose P is orthogonal (in the bilinear sense P^T b = 0) to an
  /// eigenvector b of Q^T, so that eigenvalue never leaves the imaginary axis.
  Case rank_deficient_case(int n, int m) {
    GraphMatrix g = graph(n);
    const RealMatrix r = symmetric(n);
    const RealMatrix gamma = skew(n);
    const ComplexMatrix q =
        gdiss::build_Q(SynthesisParams(ComplexMatrix::Zero(n, m), r, gamma), g);
    const Eigen::ComplexEigenSolver<ComplexMatrix> es(q.transpose());
    const Eigen::VectorXcd b = es.eigenvectors().col(integer(0, n - 1));
    ComplexMatrix p = complex(n, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const Complex proj = (b.transpose() * p.col(k))(0, 0);
      p.col(k) -= b.conjugate() * proj / b.squaredNorm();
    }
    return {g, SynthesisParams(p, r, gamma)};
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<> dist_{0.0, 1.0};
};

/// Ten rank-deficient cases: six from the eigenvector projection above and
/// four structural ones (a silent mode with Q = 0, and block-diagonal Q with
/// one block left unmonitored).
inline std::vector<Case> rank_deficient_cases(std::uint64_t seed) {
  Generator gen(seed);
  std::vector<Case> out;
  for (int k = 0; k < 6; ++k) {
    const int n = 2 + k % 3;
    out.push_back(gen.rank_deficient_case(n, k % 2 == 0 ? n : n + 1));
  }
  for (int n : {2, 3}) {
    ComplexMatrix p = gen.complex(n, n);
    p.row(n - 1).setZero();
    out.push_back({GraphMatrix(gen.symmetric(n), RealMatrix::Identity(n, n)),
                   SynthesisParams(p, RealMatrix::Zero(n, n), RealMatrix::Zero(n, n))});
  }
  for (int n : {3, 4}) {
    // Y diagonal and R diagonal make Q diagonal; a zero row of P leaves the
    // last mode uncontrolled.
    RealMatrix y = RealMatrix::Zero(n, n);
    RealMatrix r = RealMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      y(i, i) = gen.uniform(0.5, 2.0);
      r(i, i) = gen.normal();
    }
    ComplexMatrix p = gen.complex(n, n - 1);
    p.row(n - 1).setZero();
    out.push_back({GraphMatrix(RealMatrix::Zero(n, n), y),
                   SynthesisParams(p, r, RealMatrix::Zero(n, n))});
  }
  return out;
}

/// The fixed random batch used across suites: 50 cases, n in 1..4,
/// m in {n, n+1}.
inline std::vector<Case> random_valid_cases(std::uint64_t seed = 20240607, int count = 50) {
  Generator gen(seed);
  std::vector<Case> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const int n = 1 + k % 4;
    const int m = (k / 4) % 2 == 0 ? n : n + 1;
    out.push_back(gen.valid_case(n, m));
  }
  return out;
}

}  // namespace oracle
