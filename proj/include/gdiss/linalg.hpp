#pragma once

// Dense real/complex kernels shared by every other module: spectra,
// Lyapunov solves, numeric rank, Hermitian minimum eigenvalues and
// symmetric square roots. All routines are pure functions of their inputs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gdiss/errors.hpp"

namespace gdiss {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kHurwitzMargin = 1e-9;

struct Spectrum {
  std::vector<Complex> eigenvalues;
  // Unit-norm eigenvectors, parallel to `eigenvalues`. Empty unless requested.
  std::vector<ComplexVector> eigenvectors;

  double max_real_part() const {
    double out = -std::numeric_limits<double>::infinity();
    for (const auto& v : eigenvalues) out = std::max(out, v.real());
    return out;
  }
};

enum class Stability { kStable, kMarginal, kUnstable };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::kStable: return "stable";
    case Stability::kMarginal: return "marginal";
    case Stability::kUnstable: return "unstable";
  }
  return "unknown";
}

struct HurwitzCheck {
  bool hurwitz = false;
  double max_real_part = 0.0;
  Stability classification = Stability::kUnstable;
};

struct SymmetricEigen {
  RealVector values;   // ascending
  RealMatrix vectors;  // orthonormal columns
};

namespace detail {

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(std::abs(m(i, j)))) return false;
  return true;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  double out = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      out = std::max(out, static_cast<double>(std::abs(m(i, j))));
  return out;
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    fail(ErrorKind::kDimension,
         std::string(who) + ": expected a non-empty square matrix, got " +
             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* who) {
  if (!all_finite(m)) {
    fail(ErrorKind::kDomain, std::string(who) + ": non-finite entry");
  }
}

// Deterministic order: descending real part, then descending imaginary part.
inline std::vector<std::size_t> spectral_order(
    const std::vector<Complex>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (values[a].real() != values[b].real())
      return values[a].real() > values[b].real();
    return values[a].imag() > values[b].imag();
  });
  return idx;
}

inline Spectrum reorder(Spectrum s) {
  const auto idx = spectral_order(s.eigenvalues);
  Spectrum out;
  out.eigenvalues.reserve(idx.size());
  for (auto i : idx) out.eigenvalues.push_back(s.eigenvalues[i]);
  if (!s.eigenvectors.empty()) {
    out.eigenvectors.reserve(idx.size());
    for (auto i : idx) out.eigenvectors.push_back(s.eigenvectors[i]);
  }
  return out;
}

}  // namespace detail

/// Returns the canonical symplectic form [[0, I_n], [-I_n, 0]].
inline RealMatrix symplectic_form(int n) {
  if (n < 1) {
    fail(ErrorKind::kDimension,
         "symplectic_form: mode count must be >= 1, got " + std::to_string(n));
  }
  RealMatrix sigma = RealMatrix::Zero(2 * n, 2 * n);
  sigma.topRightCorner(n, n).setIdentity();
  sigma.bottomLeftCorner(n, n) = -RealMatrix::Identity(n, n);
  return sigma;
}

/// The real 2d x 2d representation [[Re M, -Im M], [Im M, Re M]] of a complex
/// d x d matrix. Its spectrum is eig(M) together with conj(eig(M)).
inline RealMatrix real_embedding(const ComplexMatrix& m) {
  const auto r = m.rows(), c = m.cols();
  RealMatrix e(2 * r, 2 * c);
  e.topLeftCorner(r, c) = m.real();
  e.topRightCorner(r, c) = -m.imag();
  e.bottomLeftCorner(r, c) = m.imag();
  e.bottomRightCorner(r, c) = m.real();
  return e;
}

/// Full complex spectrum of a real square matrix, computed by Hessenberg
/// reduction followed by shifted QR, capped at 100*d iterations.
inline Spectrum eigenvalues_real(const RealMatrix& m,
                                 bool with_vectors = false) {
  detail::require_square(m, "eigenvalues_real");
  detail::require_finite(m, "eigenvalues_real");
  const auto d = m.rows();

  Eigen::EigenSolver<RealMatrix> solver;
  solver.setMaxIterations(static_cast<Eigen::Index>(100 * d));
  solver.compute(m, with_vectors);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::kNumerical,
         "eigenvalues_real: QR iteration did not converge within " +
             std::to_string(100 * d) + " sweeps");
  }

  Spectrum s;
  s.eigenvalues.reserve(d);
  for (Eigen::Index i = 0; i < d; ++i) s.eigenvalues.push_back(solver.eigenvalues()(i));
  if (with_vectors) {
    const ComplexMatrix vecs = solver.eigenvectors();
    for (Eigen::Index i = 0; i < d; ++i) {
      ComplexVector v = vecs.col(i);
      const double nv = v.norm();
      if (nv > 0) v /= nv;
      s.eigenvectors.push_back(std::move(v));
    }
  }
  return detail::reorder(std::move(s));
}

/// Spectrum of a complex square matrix via its real embedding.
///
/// Every eigenpair (mu, w) of the embedding yields a candidate b = w_top +
/// i*w_bottom, which is an eigenvector of M when mu belongs to eig(M) and
/// vanishes when mu belongs only to conj(eig(M)). Candidates are ranked by
/// eigen-residual |Mb - mu b| / |b| and accepted greedily while they add a new
/// direction, so each conjugate pair contributes the member that M actually
/// owns.
inline Spectrum eigenvalues_complex(const ComplexMatrix& m,
                                    bool with_vectors = false) {
  detail::require_square(m, "eigenvalues_complex");
  detail::require_finite(m, "eigenvalues_complex");
  const auto d = m.rows();

  const RealMatrix embedded = real_embedding(m);
  Eigen::EigenSolver<RealMatrix> solver;
  solver.setMaxIterations(static_cast<Eigen::Index>(100 * 2 * d));
  solver.compute(embedded, true);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::kNumerical,
         "eigenvalues_complex: QR iteration on the real embedding did not "
         "converge");
  }
  const ComplexMatrix w = solver.eigenvectors();
  const double scale = std::max(1.0, detail::max_abs(m));

  struct Candidate {
    Complex mu;
    ComplexVector b;
    double residual;
    double weight;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(2 * d);
  for (Eigen::Index k = 0; k < 2 * d; ++k) {
    const ComplexVector wk = w.col(k);
    ComplexVector b = wk.head(d) + Complex(0, 1) * wk.tail(d);
    const double nb = b.norm();
    const double nw = wk.norm();
    Candidate c{solver.eigenvalues()(k), b, std::numeric_limits<double>::infinity(),
                nw > 0 ? nb / nw : 0.0};
    if (nb > 1e-8 * nw) {
      c.b /= nb;
      c.residual = (m * c.b - c.mu * c.b).norm() / scale;
    }
    candidates.push_back(std::move(c));
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].residual < candidates[b].residual;
  });

  // Greedy selection with a Gram-Schmidt independence test.
  std::vector<ComplexVector> basis;
  std::vector<bool> taken(candidates.size(), false);
  std::vector<std::size_t> chosen;
  for (auto k : order) {
    if (static_cast<Eigen::Index>(chosen.size()) == d) break;
    const auto& c = candidates[k];
    if (!std::isfinite(c.residual)) continue;
    ComplexVector r = c.b;
    for (const auto& q : basis) r -= q * q.dot(r);
    const double nr = r.norm();
    if (nr > 1e-6) {
      basis.push_back(r / nr);
      chosen.push_back(k);
      taken[k] = true;
    }
  }
  // Defective spectra do not provide d independent eigenvectors; fill the
  // remaining slots with the best-residual candidates still unused.
  for (auto k : order) {
    if (static_cast<Eigen::Index>(chosen.size()) == d) break;
    if (taken[k] || !std::isfinite(candidates[k].residual)) continue;
    chosen.push_back(k);
    taken[k] = true;
  }
  if (static_cast<Eigen::Index>(chosen.size()) != d) {
    fail(ErrorKind::kNumerical,
         "eigenvalues_complex: could not separate the spectrum from its "
         "conjugate");
  }

  Spectrum s;
  for (auto k : chosen) {
    s.eigenvalues.push_back(candidates[k].mu);
    if (with_vectors) s.eigenvectors.push_back(candidates[k].b);
  }
  return detail::reorder(std::move(s));
}

inline HurwitzCheck classify_spectrum(const Spectrum& s, double margin) {
  HurwitzCheck out;
  out.max_real_part = s.max_real_part();
  if (out.max_real_part < -margin) {
    out.classification = Stability::kStable;
  } else if (out.max_real_part < margin) {
    out.classification = Stability::kMarginal;
  } else {
    out.classification = Stability::kUnstable;
  }
  out.hurwitz = out.classification == Stability::kStable;
  return out;
}

/// True iff every eigenvalue satisfies Re(lambda) < -margin. Eigenvalues in
/// the band |Re(lambda)| < margin are classified as marginal.
inline HurwitzCheck is_hurwitz(const RealMatrix& m,
                               double margin = kHurwitzMargin) {
  return classify_spectrum(eigenvalues_real(m), margin);
}

inline HurwitzCheck is_hurwitz(const ComplexMatrix& m,
                               double margin = kHurwitzMargin) {
  return classify_spectrum(eigenvalues_complex(m), margin);
}

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix. The input is
/// symmetrized before rotating.
inline SymmetricEigen jacobi_eigen(const RealMatrix& s) {
  detail::require_square(s, "jacobi_eigen");
  detail::require_finite(s, "jacobi_eigen");
  const auto n = s.rows();
  RealMatrix a = 0.5 * (s + s.transpose());
  RealMatrix v = RealMatrix::Identity(n, n);
  const double scale = a.norm();

  auto off_norm = [&] {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  while (scale > 0 && off_norm() > 1e-14 * scale) {
    if (++sweep > kMaxSweeps) {
      fail(ErrorKind::kNumerical, "jacobi_eigen: no convergence in 100 sweeps");
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](auto i, auto j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{RealVector(n), RealMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(idx[k], idx[k]);
    out.vectors.col(k) = v.col(idx[k]);
  }
  return out;
}

/// Solves A V + V A^T + D = 0 for V by Kronecker vectorization,
/// (I (x) A + A (x) I) vec(V) = -vec(D), with partial-pivot LU and one step of
/// iterative refinement. A must be Hurwitz; the result is symmetrized.
inline RealMatrix solve_lyapunov(const RealMatrix& a, const RealMatrix& d) {
  detail::require_square(a, "solve_lyapunov(A)");
  detail::require_square(d, "solve_lyapunov(D)");
  if (a.rows() != d.rows()) {
    fail(ErrorKind::kDimension, "solve_lyapunov: A is " +
                                    std::to_string(a.rows()) + "x" +
                                    std::to_string(a.rows()) + " but D is " +
                                    std::to_string(d.rows()) + "x" +
                                    std::to_string(d.rows()));
  }
  detail::require_finite(a, "solve_lyapunov(A)");
  detail::require_finite(d, "solve_lyapunov(D)");
  const double d_scale = std::max(1.0, d.norm());
  if ((d - d.transpose()).norm() > 1e-10 * d_scale) {
    fail(ErrorKind::kShape, "solve_lyapunov: D is not symmetric");
  }
  const auto stability = is_hurwitz(a);
  if (!stability.hurwitz) {
    throw NotHurwitzError(
        "solve_lyapunov: A is not Hurwitz (max Re(lambda) = " +
            std::to_string(stability.max_real_part) +
            "), no unique steady state",
        stability.max_real_part);
  }

  const auto n = a.rows();
  const auto n2 = n * n;
  // Column-major vec: vec(A V) = (I (x) A) vec V, vec(V A^T) = (A (x) I) vec V.
  RealMatrix k = RealMatrix::Zero(n2, n2);
  for (Eigen::Index j = 0; j < n; ++j) {
    k.block(j * n, j * n, n, n) += a;
    for (Eigen::Index i = 0; i < n; ++i) {
      k.block(i * n, j * n, n, n).diagonal().array() += a(i, j);
    }
  }
  const RealVector rhs = -Eigen::Map<const RealVector>(d.data(), n2);
  const Eigen::PartialPivLU<RealMatrix> lu(k);
  RealVector x = lu.solve(rhs);
  x += lu.solve(rhs - k * x);

  RealMatrix v = Eigen::Map<const RealMatrix>(x.data(), n, n);
  v = 0.5 * (v + v.transpose()).eval();
  const double residual = (a * v + v * a.transpose() + d).norm();
  if (!(residual <= 1e-10 * d_scale)) {
    fail(ErrorKind::kNumerical,
         "solve_lyapunov: residual " + std::to_string(residual) +
             " exceeds 1e-10 * max(1, |D|)");
  }
  return v;
}

/// Number of singular values above `tol`. The default tolerance is
/// max(rows, cols) * sigma_max * 2^-50. Accepts real or complex input.
template <typename Derived>
int numeric_rank(const Eigen::MatrixBase<Derived>& input,
                 std::optional<double> tol = std::nullopt) {
  const ComplexMatrix m = input.template cast<Complex>();
  if (m.size() == 0) return 0;
  detail::require_finite(m, "numeric_rank");
  const Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const RealVector& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  if (sigma_max == 0.0) return 0;
  const double threshold =
      tol.value_or(static_cast<double>(std::max(m.rows(), m.cols())) *
                   sigma_max * std::ldexp(1.0, -50));
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++rank;
  return rank;
}

/// Minimum eigenvalue of a Hermitian matrix, via the Jacobi eigensolver on
/// its (real symmetric) embedding.
inline double psd_min_eig(const ComplexMatrix& h) {
  detail::require_square(h, "psd_min_eig");
  detail::require_finite(h, "psd_min_eig");
  const double scale = std::max(1.0, detail::max_abs(h));
  if (detail::max_abs(h - h.adjoint()) > 1e-12 * scale) {
    fail(ErrorKind::kShape, "psd_min_eig: matrix is not Hermitian");
  }
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  return jacobi_eigen(real_embedding(sym)).values(0);
}

inline double psd_min_eig(const RealMatrix& h) {
  return psd_min_eig(ComplexMatrix(h.cast<Complex>()));
}

struct SymmetricRoot {
  RealMatrix root;          // W with W W = Y
  RealMatrix inverse_root;  // W^{-1}
};

/// Square root and inverse square root of a symmetric positive definite matrix
/// from a single Jacobi decomposition.
inline SymmetricRoot sym_sqrt_pair(const RealMatrix& y) {
  detail::require_square(y, "sym_sqrt");
  detail::require_finite(y, "sym_sqrt");
  const double scale = std::max(1.0, detail::max_abs(y));
  if (detail::max_abs(y - y.transpose()) > 1e-10 * scale) {
    fail(ErrorKind::kShape, "sym_sqrt: matrix is not symmetric");
  }
  const SymmetricEigen eig = jacobi_eigen(y);
  const double top = eig.values.cwiseAbs().maxCoeff();
  if (!(eig.values(0) > 1e-10 * top)) {
    fail(ErrorKind::kDomain,
         "sym_sqrt: matrix is not positive definite (min eigenvalue " +
             std::to_string(eig.values(0)) + ")");
  }
  const RealVector r = eig.values.cwiseSqrt();
  const RealMatrix& u = eig.vectors;
  RealMatrix root = u * r.asDiagonal() * u.transpose();
  RealMatrix inv = u * r.cwiseInverse().asDiagonal() * u.transpose();
  return {0.5 * (root + root.transpose()), 0.5 * (inv + inv.transpose())};
}

inline RealMatrix sym_sqrt(const RealMatrix& y) { return sym_sqrt_pair(y).root; }

}  // namespace gdiss
