#pragma once

// Reduced dynamics of the nullifier r = (-Z, I) x:
//
//   dr = M r dt + input_gain dA,   dA' = output_gain r dt + dA
//
// with M = Q^T - Y P^# P^T, input_gain = -2 Y P^#, output_gain = P^T.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "gdiss/linalg.hpp"
#include "gdiss/states.hpp"
#include "gdiss/synthesis.hpp"

namespace gdiss {

struct NullifierSystem {
  ComplexMatrix M;            // n x n
  ComplexMatrix input_gain;   // n x m
  ComplexMatrix output_gain;  // m x n
};

struct FrequencySample {
  double omega = 0.0;
  ComplexMatrix F;  // m x m
  double unitarity_dev = 0.0;
};

struct IntertwiningResiduals {
  double r1 = 0.0;  // |(-Z,I) A - M (-Z,I)|
  double r2 = 0.0;  // |(-Z,I)(-i Sigma C^dagger) - input_gain|
  double r3 = 0.0;  // |(-Z,I)(i Sigma C^T)|
  double scale = 1.0;

  double max() const { return std::max({r1, r2, r3}); }
};

struct NullifierStabilityReport {
  bool rank_ok = false;
  int rank = 0;
  bool M_hurwitz = false;
  Stability classification = Stability::kUnstable;
  double max_real_part = 0.0;
  // max over honest eigenpairs of |Re(lambda) + |P^T b|^2 / |Y^{-1/2} b|^2|.
  std::optional<double> eig_formula_max_residual;
  int evaluated_pairs = 0;
  int skipped_pairs = 0;

  bool consistent() const { return rank_ok == M_hurwitz; }
};

inline NullifierSystem build_nullifier_system(const SynthesisParams& params,
                                              const GraphMatrix& g) {
  detail::require_compatible(params, g);
  const ComplexMatrix y = g.Y().cast<Complex>();
  const ComplexMatrix p_conj = params.P().conjugate();
  const ComplexMatrix damping = p_conj * params.P().transpose();
  NullifierSystem out;
  out.M = build_Q(params, g).transpose() - y * damping;
  out.input_gain = -2.0 * (y * p_conj);
  out.output_gain = params.P().transpose();
  return out;
}

inline IntertwiningResiduals verify_intertwining(const SystemRealization& sys,
                                                 const NullifierSystem& ns,
                                                 const GraphMatrix& g) {
  const int n = g.modes();
  const ComplexMatrix nmap = nullifier_map(g).N;
  const ComplexMatrix sigma = symplectic_form(n).cast<Complex>();
  const Complex i(0, 1);

  IntertwiningResiduals out;
  out.r1 = (nmap * sys.A.cast<Complex>() - ns.M * nmap).norm();
  out.r2 = (nmap * (-i * sigma * sys.C.adjoint()) - ns.input_gain).norm();
  out.r3 = (nmap * (i * sigma * sys.C.transpose())).norm();
  out.scale = std::max({1.0, nmap.norm() * sys.A.norm(), nmap.norm() * sys.C.norm()});
  return out;
}

/// Checks that M is Hurwitz exactly when the rank condition holds, and that
/// each eigenvalue obeys Re(lambda) = -|P^T b|^2 / |Y^{-1/2} b|^2. Eigenpairs
/// whose residual |Mb - lambda b| exceeds 1e-8 are skipped and counted.
inline NullifierStabilityReport check_nullifier_stability(
    const SynthesisParams& params, const GraphMatrix& g,
    double margin = kHurwitzMargin) {
  const NullifierSystem ns = build_nullifier_system(params, g);
  const RankCondition rank = rank_condition(params.P(), build_Q(params, g));
  const Spectrum spec = eigenvalues_complex(ns.M, true);
  const HurwitzCheck stab = classify_spectrum(spec, margin);
  const RealMatrix y_inv_root = sym_sqrt_pair(g.Y()).inverse_root;
  const ComplexMatrix pt = params.P().transpose();
  const double pair_tol = 1e-8 * std::max(1.0, ns.M.norm());

  NullifierStabilityReport out;
  out.rank_ok = rank.satisfied;
  out.rank = rank.rank;
  out.M_hurwitz = stab.hurwitz;
  out.classification = stab.classification;
  out.max_real_part = stab.max_real_part;
  for (std::size_t k = 0; k < spec.eigenvalues.size(); ++k) {
    const Complex lambda = spec.eigenvalues[k];
    const ComplexVector& b = spec.eigenvectors[k];
    if ((ns.M * b - lambda * b).norm() > pair_tol) {
      ++out.skipped_pairs;
      continue;
    }
    const double num = (pt * b).squaredNorm();
    const double den = (y_inv_root.cast<Complex>() * b).squaredNorm();
    const double res = std::abs(lambda.real() + num / den);
    out.eig_formula_max_residual = std::max(out.eig_formula_max_residual.value_or(0.0), res);
    ++out.evaluated_pairs;
  }
  return out;
}

namespace detail {

inline FrequencySample evaluate_transfer(const NullifierSystem& ns, double omega) {
  const auto n = ns.M.rows();
  const auto m = ns.output_gain.rows();
  const ComplexMatrix resolvent_arg =
      Complex(0, omega) * ComplexMatrix::Identity(n, n) - ns.M;
  const Eigen::PartialPivLU<ComplexMatrix> lu(resolvent_arg);
  FrequencySample s;
  s.omega = omega;
  s.F = ComplexMatrix::Identity(m, m) + ns.output_gain * lu.solve(ns.input_gain);
  s.unitarity_dev = (s.F.adjoint() * s.F - ComplexMatrix::Identity(m, m)).norm();
  if (!std::isfinite(s.unitarity_dev)) {
    fail(ErrorKind::kStability, "transfer_function: singular resolvent at omega = " +
                                    std::to_string(omega));
  }
  return s;
}

inline void require_hurwitz_nullifier(const NullifierSystem& ns, const char* who) {
  const HurwitzCheck stab = is_hurwitz(ns.M);
  if (!stab.hurwitz) {
    throw NotHurwitzError(std::string(who) +
                              ": nullifier matrix M is not Hurwitz (max Re = " +
                              std::to_string(stab.max_real_part) + ")",
                          stab.max_real_part);
  }
}

}  // namespace detail

/// F(omega) = I_m - 2 P^T (i omega - Q^T + Y P^# P^T)^{-1} Y P^#.
inline FrequencySample transfer_function(const NullifierSystem& ns, double omega) {
  detail::require_hurwitz_nullifier(ns, "transfer_function");
  return detail::evaluate_transfer(ns, omega);
}

/// `count` log-spaced points in [omega_min, omega_max], preceded by 0 when
/// `include_dc` is set.
inline std::vector<double> frequency_grid(double omega_min = 1e-3,
                                          double omega_max = 1e3, int count = 100,
                                          bool include_dc = true) {
  if (!(omega_min > 0) || !(omega_max >= omega_min) || count < 1) {
    fail(ErrorKind::kDomain, "frequency_grid: need 0 < omega_min <= omega_max, count >= 1");
  }
  std::vector<double> out;
  if (include_dc) out.push_back(0.0);
  const double lo = std::log10(omega_min), hi = std::log10(omega_max);
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    out.push_back(std::pow(10.0, lo + t * (hi - lo)));
  }
  return out;
}

inline std::vector<FrequencySample> frequency_response(const NullifierSystem& ns,
                                                       std::span<const double> omegas) {
  detail::require_hurwitz_nullifier(ns, "frequency_response");
  std::vector<FrequencySample> out;
  out.reserve(omegas.size());
  for (double w : omegas) out.push_back(detail::evaluate_transfer(ns, w));
  return out;
}

inline double unitarity_sweep(const NullifierSystem& ns, std::span<const double> omegas) {
  double worst = 0.0;
  for (const auto& s : frequency_response(ns, omegas)) {
    worst = std::max(worst, s.unitarity_dev);
  }
  return worst;
}

}  // namespace gdiss
