#pragma once

// Engineered open-system matrices with a prescribed unique pure steady state.
//
// Given a graph matrix (X, Y) and free parameters (P, R, Gamma) the coupling
// and Hamiltonian matrices are
//
//   C = P^T (-Z, I_n)
//   G = [[XRX + YRY - Gamma Y^-1 X - X Y^-1 Gamma^T,  -XR + Gamma Y^-1],
//        [-RX + Y^-1 Gamma^T,                          R              ]]
//
// and the resulting drift/diffusion pair (A, D) has the target covariance as
// the unique Lyapunov solution whenever rank(P, QP, ..., Q^{n-1}P) = n with
// Q = -iRY - Y^-1 Gamma^T.

#include <string>
#include <utility>

#include "gdiss/linalg.hpp"
#include "gdiss/states.hpp"

namespace gdiss {

class SynthesisParams {
 public:
  SynthesisParams(ComplexMatrix p, RealMatrix r, RealMatrix gamma)
      : p_(std::move(p)), r_(std::move(r)), gamma_(std::move(gamma)) {
    const auto n = p_.rows();
    if (n == 0 || p_.cols() == 0) {
      fail(ErrorKind::kDimension, "SynthesisParams: P must be non-empty");
    }
    if (r_.rows() != n || r_.cols() != n || gamma_.rows() != n ||
        gamma_.cols() != n) {
      fail(ErrorKind::kDimension,
           "SynthesisParams: R and Gamma must be n x n with n = rows(P) = " +
               std::to_string(n));
    }
    detail::require_finite(p_, "SynthesisParams P");
    detail::require_finite(r_, "SynthesisParams R");
    detail::require_finite(gamma_, "SynthesisParams Gamma");
    if (detail::max_abs(r_ - r_.transpose()) >
        1e-12 * std::max(1.0, detail::max_abs(r_))) {
      fail(ErrorKind::kShape, "SynthesisParams: R is not symmetric");
    }
    if (detail::max_abs(gamma_ + gamma_.transpose()) >
        1e-12 * std::max(1.0, detail::max_abs(gamma_))) {
      fail(ErrorKind::kShape, "SynthesisParams: Gamma is not skew-symmetric");
    }
  }

  const ComplexMatrix& P() const { return p_; }
  const RealMatrix& R() const { return r_; }
  const RealMatrix& Gamma() const { return gamma_; }
  int modes() const { return static_cast<int>(p_.rows()); }
  int channels() const { return static_cast<int>(p_.cols()); }

 private:
  ComplexMatrix p_;
  RealMatrix r_;
  RealMatrix gamma_;
};

struct SystemRealization {
  ComplexMatrix C;  // m x 2n coupling
  RealMatrix G;     // 2n x 2n Hamiltonian matrix
  RealMatrix A;     // drift
  RealMatrix D;     // diffusion
  ComplexMatrix Q;  // n x n
  bool rank_ok = false;
  int controllability_rank = 0;
};

struct RankCondition {
  bool satisfied = false;
  int rank = 0;
};

struct DriftDiffusion {
  RealMatrix A;
  RealMatrix D;
};

namespace detail {

inline void require_compatible(const SynthesisParams& params,
                               const GraphMatrix& g) {
  if (params.modes() != g.modes()) {
    fail(ErrorKind::kDimension,
         "synthesis: P has " + std::to_string(params.modes()) +
             " rows but the graph has " + std::to_string(g.modes()) + " modes");
  }
}

inline RealMatrix inverse_spd(const RealMatrix& y) {
  return y.ldlt().solve(RealMatrix::Identity(y.rows(), y.cols()));
}

// (-Z; I_n) stacked vertically.
inline ComplexMatrix nullifier_column(const GraphMatrix& g) {
  const int n = g.modes();
  ComplexMatrix out(2 * n, n);
  out.topRows(n) = -g.Z();
  out.bottomRows(n) = ComplexMatrix::Identity(n, n);
  return out;
}

}  // namespace detail

inline ComplexMatrix build_C(const SynthesisParams& params, const GraphMatrix& g) {
  detail::require_compatible(params, g);
  return params.P().transpose() * nullifier_map(g).N;
}

inline RealMatrix build_G(const SynthesisParams& params, const GraphMatrix& g) {
  detail::require_compatible(params, g);
  const int n = g.modes();
  const RealMatrix& x = g.X();
  const RealMatrix& y = g.Y();
  const RealMatrix& r = params.R();
  const RealMatrix& gm = params.Gamma();
  const RealMatrix y_inv = detail::inverse_spd(y);

  RealMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = x * r * x + y * r * y - gm * y_inv * x -
                            x * y_inv * gm.transpose();
  out.topRightCorner(n, n) = -x * r + gm * y_inv;
  out.bottomLeftCorner(n, n) = -r * x + y_inv * gm.transpose();
  out.bottomRightCorner(n, n) = r;

  if ((out - out.transpose()).norm() > 1e-10 * std::max(1.0, out.norm())) {
    fail(ErrorKind::kInternal, "build_G: assembled G is not symmetric");
  }
  return out;
}

/// Q = -iRY - Y^-1 Gamma^T.
inline ComplexMatrix build_Q(const SynthesisParams& params, const GraphMatrix& g) {
  detail::require_compatible(params, g);
  const RealMatrix y_inv = detail::inverse_spd(g.Y());
  ComplexMatrix q(g.modes(), g.modes());
  q.real() = -y_inv * params.Gamma().transpose();
  q.imag() = -params.R() * g.Y();
  return q;
}

/// Rank of the block matrix (P, QP, ..., Q^{n-1}P) against n.
inline RankCondition rank_condition(const ComplexMatrix& p, const ComplexMatrix& q) {
  const auto n = p.rows();
  const auto m = p.cols();
  if (q.rows() != n || q.cols() != n) {
    fail(ErrorKind::kDimension, "rank_condition: Q must be n x n");
  }
  ComplexMatrix ctrb(n, n * m);
  ctrb.leftCols(m) = p;
  for (Eigen::Index k = 1; k < n; ++k) {
    ctrb.middleCols(k * m, m) = q * ctrb.middleCols((k - 1) * m, m);
  }
  RankCondition out;
  out.rank = numeric_rank(ctrb);
  out.satisfied = out.rank == n;
  return out;
}

/// A = Sigma [G + Im(C^dagger C)], D = Sigma Re(C^dagger C) Sigma^T.
///
/// Both are formed in complex arithmetic and checked to be real before the
/// imaginary residue is dropped.
inline DriftDiffusion drift_and_diffusion(const ComplexMatrix& c,
                                          const RealMatrix& g) {
  if (c.cols() % 2 != 0 || g.rows() != c.cols() || g.cols() != c.cols()) {
    fail(ErrorKind::kDimension,
         "drift_and_diffusion: C must be m x 2n and G 2n x 2n");
  }
  const int n = static_cast<int>(c.cols() / 2);
  const ComplexMatrix sigma = symplectic_form(n).cast<Complex>();
  const ComplexMatrix cc = c.adjoint() * c;
  const ComplexMatrix cc_conj = cc.conjugate();  // C^T C^#
  const ComplexMatrix im_part = (cc - cc_conj) / Complex(0, 2);
  const ComplexMatrix re_part = (cc + cc_conj) / 2.0;

  const ComplexMatrix a = sigma * (g.cast<Complex>() + im_part);
  const ComplexMatrix d = sigma * re_part * sigma.transpose();
  const double tol = 1e-12 * std::max(1.0, cc.norm() + g.norm());
  if (a.imag().norm() > tol || d.imag().norm() > tol) {
    fail(ErrorKind::kInternal,
         "drift_and_diffusion: A or D has a non-negligible imaginary part");
  }
  return {a.real(), d.real()};
}

/// Realization with an externally supplied Hamiltonian matrix in place of the
/// synthesized one. Used to probe how the certification reacts to a G that
/// does not come from the parameterization.
inline SystemRealization assemble_with_G(const SynthesisParams& params,
                                         const GraphMatrix& g, RealMatrix G) {
  detail::require_compatible(params, g);
  const int n = g.modes();
  if (G.rows() != 2 * n || G.cols() != 2 * n) {
    fail(ErrorKind::kDimension, "assemble: G must be 2n x 2n");
  }
  SystemRealization out;
  out.C = build_C(params, g);
  out.G = std::move(G);
  out.Q = build_Q(params, g);
  auto [a, d] = drift_and_diffusion(out.C, out.G);
  out.A = std::move(a);
  out.D = std::move(d);
  const RankCondition rank = rank_condition(params.P(), out.Q);
  out.rank_ok = rank.satisfied;
  out.controllability_rank = rank.rank;
  return out;
}

inline SystemRealization assemble(const SynthesisParams& params,
                                  const GraphMatrix& g) {
  return assemble_with_G(params, g, build_G(params, g));
}

/// |G Sigma^T (-Z; I) - (-Z; I) Q|_F.
inline double verify_G_condition(const SystemRealization& sys,
                                 const GraphMatrix& g) {
  const int n = g.modes();
  const ComplexMatrix col = detail::nullifier_column(g);
  const ComplexMatrix lhs =
      sys.G.cast<Complex>() * symplectic_form(n).transpose().cast<Complex>() * col;
  return (lhs - col * sys.Q).norm();
}

inline double G_condition_tolerance(const SystemRealization& sys) {
  return 1e-10 * std::max(1.0, sys.G.norm());
}

struct SteadyStateCertificate {
  RealMatrix lyapunov_V;
  RealMatrix target_V;
  double frobenius_gap = 0.0;  // relative, floor max(1, |V_target|)
  bool A_hurwitz = false;
  double max_real_part = 0.0;

  bool passed(double tol = 1e-8) const { return A_hurwitz && frobenius_gap <= tol; }
};

/// Solves the Lyapunov equation for (A, D) and compares with the target
/// covariance of `g`. Throws NotHurwitzError when A is not Hurwitz.
inline SteadyStateCertificate certify_steady_state(const SystemRealization& sys,
                                                   const GraphMatrix& g) {
  const HurwitzCheck stab = is_hurwitz(sys.A);
  if (!stab.hurwitz) {
    throw NotHurwitzError(
        "certify_steady_state: A is " + std::string(to_string(stab.classification)) +
            ", max Re(lambda) = " + std::to_string(stab.max_real_part),
        stab.max_real_part);
  }
  SteadyStateCertificate out;
  out.A_hurwitz = true;
  out.max_real_part = stab.max_real_part;
  out.lyapunov_V = solve_lyapunov(sys.A, sys.D);
  out.target_V = pure_covariance(g).V;
  out.frobenius_gap = (out.lyapunov_V - out.target_V).norm() /
                      std::max(1.0, out.target_V.norm());
  return out;
}

}  // namespace gdiss
