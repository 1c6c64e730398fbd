#pragma once

// Time-domain propagation of the first and second moments,
//
//   d<x>/dt = A <x>,   dV/dt = A V + V A^T + D,
//
// plus convergence-time extraction from the nullifier spectrum and the
// closeness/convergence-time trade-off for cluster graphs.

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "gdiss/linalg.hpp"
#include "gdiss/nullifier.hpp"
#include "gdiss/presets.hpp"
#include "gdiss/states.hpp"
#include "gdiss/synthesis.hpp"

namespace gdiss {

struct SimulationOptions {
  double horizon = 0.0;
  double step = 0.0;
  int record_stride = 1;              // record every k-th step (and the last)
  double positivity_floor = -1e-6;    // abort when min eig(V + i Sigma/2) drops below
};

struct Trajectory {
  std::vector<double> times;
  std::vector<RealVector> means;
  std::vector<RealMatrix> covariances;
  std::vector<double> target_gap;     // |V_t - V_target|_F
  std::vector<double> nullifier_gap;  // |N (V_t - i Sigma/2) N^dagger|_F
  std::vector<double> min_uncertainty_eig;
  double step_used = 0.0;
  int steps = 0;
};

struct TradeoffRow {
  double alpha = 0.0;
  double epsilon = 0.0;  // e^{-2 alpha}
  double T = 0.0;        // 1 / min |Re lambda(M)|
  double product = 0.0;  // T * epsilon
  bool rank_ok = true;
};

struct TradeoffSummary {
  double min_product = 0.0;  // empirical lower bound c
  double max_product = 0.0;
  double coefficient_of_variation = 0.0;
  int flagged_rows = 0;
};

/// Smallest |Re lambda(A)|, the slowest decay rate of the moments.
inline double slowest_decay_rate(const RealMatrix& a) {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& v : eigenvalues_real(a).eigenvalues) out = std::min(out, std::abs(v.real()));
  return out;
}

inline double default_step(const RealMatrix& a) {
  double fastest = 0.0;
  for (const auto& v : eigenvalues_real(a).eigenvalues) fastest = std::max(fastest, std::abs(v));
  return fastest > 0 ? std::min(0.01, 0.1 / fastest) : 0.01;
}

/// 25 / min |Re lambda(A)|. Requires A Hurwitz.
inline double default_horizon(const RealMatrix& a) {
  const HurwitzCheck stab = is_hurwitz(a);
  if (!stab.hurwitz) {
    throw NotHurwitzError("default_horizon: A is not Hurwitz", stab.max_real_part);
  }
  return 25.0 / slowest_decay_rate(a);
}

/// Largest |R(h mu)| over the decaying modes of both moment equations, where
/// R(z) = 1 + z + z^2/2 + z^3/6 + z^4/24 and mu runs over lambda_i (mean) and
/// lambda_i + lambda_j (covariance) with Re mu < 0. Above 1 the discrete
/// solution grows where the continuous one decays.
inline double rk4_step_growth(const RealMatrix& a, double h) {
  const auto eig = eigenvalues_real(a).eigenvalues;
  auto amplification = [h](Complex mu) {
    if (mu.real() >= 0.0) return 0.0;
    const Complex z = h * mu;
    return std::abs(1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0);
  };
  double out = 0.0;
  for (std::size_t i = 0; i < eig.size(); ++i) {
    out = std::max(out, amplification(eig[i]));
    for (std::size_t j = i; j < eig.size(); ++j) {
      out = std::max(out, amplification(eig[i] + eig[j]));
    }
  }
  return out;
}

/// Classic fourth-order Runge-Kutta integration of the moment equations.
///
/// The step is shrunk to horizon / ceil(horizon / step) when the ratio is not
/// integral, so the run always ends exactly at `horizon`. Gaps are measured
/// against the pure target of `g`.
inline Trajectory simulate(const SystemRealization& sys, const GraphMatrix& g,
                           const RealMatrix& v0, const RealVector& x0,
                           const SimulationOptions& opt) {
  const int n = g.modes();
  const int dim = 2 * n;
  if (sys.A.rows() != dim || v0.rows() != dim || v0.cols() != dim ||
      x0.size() != dim) {
    fail(ErrorKind::kDimension, "simulate: A, V0 and x0 must all be 2n-dimensional");
  }
  if (!(opt.step > 0) || !(opt.horizon >= opt.step)) {
    fail(ErrorKind::kDomain, "simulate: need step > 0 and horizon >= step");
  }
  if (opt.record_stride < 1) {
    fail(ErrorKind::kDomain, "simulate: record_stride must be >= 1");
  }
  detail::require_finite(v0, "simulate V0");
  if (detail::max_abs(v0 - v0.transpose()) > 1e-10 * std::max(1.0, detail::max_abs(v0))) {
    fail(ErrorKind::kShape, "simulate: V0 is not symmetric");
  }
  if (psd_min_eig(uncertainty_matrix(v0)) < -1e-9) {
    fail(ErrorKind::kDomain, "simulate: V0 violates the uncertainty relation");
  }

  const double ratio = opt.horizon / opt.step;
  const double rounded = std::round(ratio);
  const long steps = std::abs(ratio - rounded) <= 1e-9 * ratio
                         ? static_cast<long>(rounded)
                         : static_cast<long>(std::ceil(ratio));
  const double h = opt.horizon / static_cast<double>(steps);
  const double growth = rk4_step_growth(sys.A, h);
  if (growth > 1.0 + 1e-12) {
    fail(ErrorKind::kDivergence,
         "simulate: step " + std::to_string(h) +
             " lies outside the RK4 stability region (amplification " +
             std::to_string(growth) + " per step); reduce the step");
  }

  const RealMatrix& a = sys.A;
  const RealMatrix at = a.transpose();
  const RealMatrix& d = sys.D;
  const RealMatrix target = pure_covariance(g).V;
  const ComplexMatrix nmap = nullifier_map(g).N;

  Trajectory traj;
  traj.step_used = h;
  traj.steps = static_cast<int>(steps);

  RealMatrix v = 0.5 * (v0 + v0.transpose());
  RealVector x = x0;

  auto record = [&](double t, double min_eig) {
    traj.times.push_back(t);
    traj.means.push_back(x);
    traj.covariances.push_back(v);
    traj.target_gap.push_back((v - target).norm());
    traj.nullifier_gap.push_back(nullifier_residual(nmap, v));
    traj.min_uncertainty_eig.push_back(min_eig);
  };
  record(0.0, psd_min_eig(uncertainty_matrix(v)));

  auto fv = [&](const RealMatrix& m) -> RealMatrix { return a * m + m * at + d; };
  for (long k = 1; k <= steps; ++k) {
    const RealMatrix k1 = fv(v);
    const RealMatrix k2 = fv(v + 0.5 * h * k1);
    const RealMatrix k3 = fv(v + 0.5 * h * k2);
    const RealMatrix k4 = fv(v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    v = 0.5 * (v + v.transpose()).eval();

    const RealVector l1 = a * x;
    const RealVector l2 = a * (x + 0.5 * h * l1);
    const RealVector l3 = a * (x + 0.5 * h * l2);
    const RealVector l4 = a * (x + h * l3);
    x += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);

    const double t = h * static_cast<double>(k);
    if (!detail::all_finite(v) || !detail::all_finite(x)) {
      fail(ErrorKind::kDivergence,
           "simulate: non-finite state at t = " + std::to_string(t));
    }
    const double min_eig = psd_min_eig(uncertainty_matrix(v));
    if (min_eig < opt.positivity_floor) {
      fail(ErrorKind::kDivergence,
           "simulate: uncertainty relation violated at t = " + std::to_string(t) +
               " (min eigenvalue " + std::to_string(min_eig) + "); reduce the step");
    }
    if (k % opt.record_stride == 0 || k == steps) record(t, min_eig);
  }
  return traj;
}

/// T = 1 / min |Re lambda(M)| for the nullifier matrix M.
inline double convergence_time(const NullifierSystem& ns) {
  const Spectrum s = eigenvalues_complex(ns.M);
  const HurwitzCheck stab = classify_spectrum(s, kHurwitzMargin);
  if (!stab.hurwitz) {
    throw NotHurwitzError("convergence_time: M is not Hurwitz, convergence undefined",
                          stab.max_real_part);
  }
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& v : s.eigenvalues) slowest = std::min(slowest, std::abs(v.real()));
  return 1.0 / slowest;
}

using ParamsBuilder = std::function<SynthesisParams(const GraphMatrix&)>;

inline std::vector<TradeoffRow> tradeoff_sweep(const RealMatrix& adjacency,
                                               std::span<const double> alphas,
                                               const ParamsBuilder& builder = {}) {
  std::vector<TradeoffRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas) {
    const GraphMatrix g = cluster_graph(adjacency, alpha);
    const SynthesisParams params =
        builder ? builder(g) : default_cluster_params(g.modes());
    TradeoffRow row;
    row.alpha = alpha;
    row.epsilon = std::exp(-2.0 * alpha);
    row.rank_ok = rank_condition(params.P(), build_Q(params, g)).satisfied;
    try {
      row.T = convergence_time(build_nullifier_system(params, g));
      row.product = row.T * row.epsilon;
    } catch (const NotHurwitzError&) {
      row.rank_ok = false;
    }
    if (!row.rank_ok) {
      row.T = std::numeric_limits<double>::quiet_NaN();
      row.product = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

inline TradeoffSummary summarize_tradeoff(std::span<const TradeoffRow> rows) {
  TradeoffSummary s;
  std::vector<double> products;
  for (const auto& r : rows) {
    if (r.rank_ok) {
      products.push_back(r.product);
    } else {
      ++s.flagged_rows;
    }
  }
  if (products.empty()) {
    s.min_product = s.max_product = s.coefficient_of_variation =
        std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.min_product = *std::min_element(products.begin(), products.end());
  s.max_product = *std::max_element(products.begin(), products.end());
  double mean = 0.0;
  for (double p : products) mean += p;
  mean /= static_cast<double>(products.size());
  double var = 0.0;
  for (double p : products) var += (p - mean) * (p - mean);
  var /= static_cast<double>(products.size());
  s.coefficient_of_variation = std::sqrt(var) / mean;
  return s;
}

}  // namespace gdiss
