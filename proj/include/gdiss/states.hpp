#pragma once

// Pure Gaussian states parameterized by a graph matrix Z = X + iY.

#include <string>
#include <utility>

#include "gdiss/linalg.hpp"

namespace gdiss {

/// Pure-state descriptor (X, Y): X real symmetric, Y real symmetric positive
/// definite. Validated on construction.
class GraphMatrix {
 public:
  GraphMatrix(RealMatrix x, RealMatrix y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.rows() != x_.cols() || x_.rows() == 0) {
      fail(ErrorKind::kDimension, "GraphMatrix: X must be square and non-empty");
    }
    if (y_.rows() != x_.rows() || y_.cols() != x_.cols()) {
      fail(ErrorKind::kDimension, "GraphMatrix: X and Y must have equal size");
    }
    detail::require_finite(x_, "GraphMatrix X");
    detail::require_finite(y_, "GraphMatrix Y");
    if (detail::max_abs(x_ - x_.transpose()) >
        1e-12 * std::max(1.0, detail::max_abs(x_))) {
      fail(ErrorKind::kShape, "GraphMatrix: X is not symmetric");
    }
    if (detail::max_abs(y_ - y_.transpose()) >
        1e-12 * std::max(1.0, detail::max_abs(y_))) {
      fail(ErrorKind::kShape, "GraphMatrix: Y is not symmetric");
    }
    const RealVector eig = jacobi_eigen(y_).values;
    if (!(eig(0) > 1e-10 * eig.cwiseAbs().maxCoeff())) {
      fail(ErrorKind::kDomain,
           "GraphMatrix: Y is not positive definite (min eigenvalue " +
               std::to_string(eig(0)) + ")");
    }
  }

  const RealMatrix& X() const { return x_; }
  const RealMatrix& Y() const { return y_; }
  int modes() const { return static_cast<int>(x_.rows()); }

  ComplexMatrix Z() const {
    ComplexMatrix z(x_.rows(), x_.cols());
    z.real() = x_;
    z.imag() = y_;
    return z;
  }

  static GraphMatrix vacuum(int n) {
    return GraphMatrix(RealMatrix::Zero(n, n), RealMatrix::Identity(n, n));
  }

 private:
  RealMatrix x_;
  RealMatrix y_;
};

struct PureStateTarget {
  GraphMatrix graph;
  RealMatrix S;  // symplectic factor
  RealMatrix V;  // covariance, vacuum variance 1/2
};

/// The nullifier coefficients (-Z, I_n); the right block is exactly I_n.
struct NullifierMap {
  ComplexMatrix N;
};

/// S = [[Y^{-1/2}, 0], [X Y^{-1/2}, Y^{1/2}]].
inline RealMatrix build_symplectic(const GraphMatrix& g) {
  const int n = g.modes();
  const SymmetricRoot r = sym_sqrt_pair(g.Y());
  RealMatrix s = RealMatrix::Zero(2 * n, 2 * n);
  s.topLeftCorner(n, n) = r.inverse_root;
  s.bottomLeftCorner(n, n) = g.X() * r.inverse_root;
  s.bottomRightCorner(n, n) = r.root;
  return s;
}

inline PureStateTarget pure_covariance(const GraphMatrix& g) {
  RealMatrix s = build_symplectic(g);
  RealMatrix v = 0.5 * s * s.transpose();
  v = 0.5 * (v + v.transpose()).eval();
  return {g, std::move(s), std::move(v)};
}

inline NullifierMap nullifier_map(const GraphMatrix& g) {
  const int n = g.modes();
  ComplexMatrix out(n, 2 * n);
  out.leftCols(n) = -g.Z();
  out.rightCols(n) = ComplexMatrix::Identity(n, n);
  return {std::move(out)};
}

/// V + i Sigma / 2, the matrix the uncertainty relation requires to be PSD.
inline ComplexMatrix uncertainty_matrix(const RealMatrix& v) {
  const int n = static_cast<int>(v.rows() / 2);
  ComplexMatrix h = v.cast<Complex>();
  h += Complex(0, 0.5) * symplectic_form(n).cast<Complex>();
  return h;
}

/// Frobenius norm of N (V - i Sigma/2) N^dagger, the conjugate of the
/// second-moment matrix <r^dagger r> of the nullifier. It vanishes exactly on
/// the pure state annihilated by N. Equivalently |N V N^dagger - Y|.
inline double nullifier_residual(const ComplexMatrix& n_map, const RealMatrix& v) {
  const ComplexMatrix h = uncertainty_matrix(v).conjugate();
  return (n_map * h * n_map.adjoint()).norm();
}

struct PurityReport {
  double min_uncertainty_eig = 0.0;
  double det2V = 0.0;
  double nullifier_residual = 0.0;

  bool pure(double eig_tol = 1e-10, double det_tol = 1e-8,
            double nullifier_tol = 1e-10) const {
    return min_uncertainty_eig >= -eig_tol && std::abs(det2V - 1.0) <= det_tol &&
           nullifier_residual <= nullifier_tol;
  }
};

/// det(2V) = 1 together with V + i Sigma/2 >= 0 forces every symplectic
/// eigenvalue to 1/2, i.e. purity.
inline PurityReport verify_purity(const PureStateTarget& t) {
  PurityReport r;
  r.min_uncertainty_eig = psd_min_eig(uncertainty_matrix(t.V));
  r.det2V = (2.0 * t.V).determinant();
  r.nullifier_residual = nullifier_residual(nullifier_map(t.graph).N, t.V);
  return r;
}

}  // namespace gdiss
