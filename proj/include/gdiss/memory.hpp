#pragma once

// State-transfer memory: the system is driven by a field W^S = S W that
// already carries the target state,
//
//   dx = A x dt + B dW^S,   B = sqrt(2) Sigma (-C_i^T, C_r^T) S^{-1},
//
// and (A, B) must not depend on the graph. The only realization with that
// property is P = i sqrt(2) kappa Y^{-1/2}, R = 0, Gamma = 0, which yields
// B = -2 kappa I and A = -2 kappa^2 I.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gdiss/linalg.hpp"
#include "gdiss/presets.hpp"
#include "gdiss/states.hpp"
#include "gdiss/synthesis.hpp"

namespace gdiss {

struct MemoryRealization {
  double kappa = 0.0;
  SynthesisParams params;
  SystemRealization system;
  RealMatrix B;
  RealMatrix A;
};

/// The pair a memory exposes to its input field.
struct InputCoupledDynamics {
  RealMatrix A;
  RealMatrix B;
};

using MemoryBuilder = std::function<InputCoupledDynamics(const GraphMatrix&)>;

/// Gain of the quadrature noise dW = (dQ; dP) in dx = A x dt + gain dW:
/// sqrt(2) Sigma (-C_i^T, C_r^T). Equals B when S = I.
inline RealMatrix quadrature_input_gain(const ComplexMatrix& c) {
  if (c.cols() % 2 != 0) {
    fail(ErrorKind::kDimension, "quadrature_input_gain: C must be m x 2n");
  }
  const int n = static_cast<int>(c.cols() / 2);
  const auto m = c.rows();
  RealMatrix blocks(2 * n, 2 * m);
  blocks.leftCols(m) = -c.imag().transpose();
  blocks.rightCols(m) = c.real().transpose();
  return std::sqrt(2.0) * symplectic_form(n) * blocks;
}

/// B = sqrt(2) Sigma (-C_i^T, C_r^T) S^{-1} with S^{-1} = Sigma S^T Sigma^T.
/// Requires as many input channels as modes.
inline RealMatrix build_B(const SystemRealization& sys, const GraphMatrix& g) {
  const int n = g.modes();
  if (sys.C.rows() != n || sys.C.cols() != 2 * n) {
    fail(ErrorKind::kDimension,
         "build_B: quadrature pairing needs m = n channels, got m = " +
             std::to_string(sys.C.rows()) + " for n = " + std::to_string(n));
  }
  const RealMatrix sigma = symplectic_form(n);
  const RealMatrix s_inv = sigma * build_symplectic(g).transpose() * sigma.transpose();
  return quadrature_input_gain(sys.C) * s_inv;
}

inline MemoryRealization build_memory(const GraphMatrix& g, double kappa) {
  if (!(kappa > 0) || !std::isfinite(kappa)) {
    fail(ErrorKind::kDomain, "build_memory: kappa must be > 0");
  }
  const int n = g.modes();
  const RealMatrix y_inv_root = sym_sqrt_pair(g.Y()).inverse_root;
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  p.imag() = std::sqrt(2.0) * kappa * y_inv_root;
  SynthesisParams params(std::move(p), RealMatrix::Zero(n, n), RealMatrix::Zero(n, n));
  SystemRealization sys = assemble(params, g);
  RealMatrix b = build_B(sys, g);
  RealMatrix a = sys.A;

  const RealMatrix eye = RealMatrix::Identity(2 * n, 2 * n);
  const double b_dev = detail::max_abs(b + 2.0 * kappa * eye);
  const double a_dev = detail::max_abs(a + 2.0 * kappa * kappa * eye);
  if (b_dev > 1e-10 * std::max(1.0, 2.0 * kappa) ||
      a_dev > 1e-10 * std::max(1.0, 2.0 * kappa * kappa) || !sys.rank_ok) {
    fail(ErrorKind::kInternal,
         "build_memory: realization is not the graph-independent memory (|B + "
         "2k I| = " + std::to_string(b_dev) + ", |A + 2k^2 I| = " +
             std::to_string(a_dev) + ")");
  }
  return {kappa, std::move(params), std::move(sys), std::move(b), std::move(a)};
}

inline MemoryBuilder memory_builder(double kappa) {
  return [kappa](const GraphMatrix& g) {
    MemoryRealization mem = build_memory(g, kappa);
    return InputCoupledDynamics{std::move(mem.A), std::move(mem.B)};
  };
}

/// Builder for an arbitrary parameter map; A and B taken from the assembled
/// realization.
inline MemoryBuilder realization_builder(
    std::function<SynthesisParams(const GraphMatrix&)> params_for) {
  return [params_for = std::move(params_for)](const GraphMatrix& g) {
    const SystemRealization sys = assemble(params_for(g), g);
    return InputCoupledDynamics{sys.A, build_B(sys, g)};
  };
}

/// True iff the builder returns the same (A, B) for every probe, within 1e-10
/// absolute. Probes must share a mode count and be pairwise distinct.
inline bool check_graph_independence(const MemoryBuilder& builder,
                                      std::span<const GraphMatrix> probes) {
  if (probes.size() < 3) {
    fail(ErrorKind::kDomain, "check_graph_independence: need at least 3 probe graphs");
  }
  const int n = probes.front().modes();
  for (const auto& g : probes) {
    if (g.modes() != n) {
      fail(ErrorKind::kDimension,
           "check_graph_independence: probes must share the mode count");
    }
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = i + 1; j < probes.size(); ++j) {
      if (probes[i].X() == probes[j].X() && probes[i].Y() == probes[j].Y()) {
        fail(ErrorKind::kDomain, "check_graph_independence: duplicate probe graphs");
      }
    }
  }
  const InputCoupledDynamics ref = builder(probes.front());
  for (std::size_t k = 1; k < probes.size(); ++k) {
    const InputCoupledDynamics cur = builder(probes[k]);
    if (cur.A.rows() != ref.A.rows() || cur.B.rows() != ref.B.rows() ||
        cur.B.cols() != ref.B.cols()) {
      return false;
    }
    if (detail::max_abs(cur.A - ref.A) > 1e-10 || detail::max_abs(cur.B - ref.B) > 1e-10) {
      return false;
    }
  }
  return true;
}

/// Three distinct graphs on n modes: vacuum, the path cluster at alpha = 1,
/// and a correlated graph with X != 0 and non-diagonal Y.
inline std::vector<GraphMatrix> memory_probe_graphs(int n) {
  const RealMatrix path = chain_adjacency(n);
  const RealMatrix eye = RealMatrix::Identity(n, n);
  return {GraphMatrix::vacuum(n), cluster_graph(path, 1.0),
          GraphMatrix(0.5 * eye + 0.3 * path, 2.0 * eye + 0.4 * path)};
}

}  // namespace gdiss
