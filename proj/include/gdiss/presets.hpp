#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gdiss/states.hpp"
#include "gdiss/synthesis.hpp"

namespace gdiss {

struct PresetSpec {
  std::string name;
  GraphMatrix graph;
  SynthesisParams params;
  std::string notes;
};

inline RealMatrix chain_adjacency(int n = 4) {
  if (n < 1) fail(ErrorKind::kDimension, "chain_adjacency: n must be >= 1");
  RealMatrix x = RealMatrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) x(i, i + 1) = x(i + 1, i) = 1.0;
  return x;
}

/// Star on four nodes with node 1 as the hub.
inline RealMatrix tshape_adjacency() {
  RealMatrix x = RealMatrix::Zero(4, 4);
  for (int i = 1; i < 4; ++i) x(0, i) = x(i, 0) = 1.0;
  return x;
}

/// Four-cycle 1-2-3-4-1.
inline RealMatrix square_adjacency() {
  RealMatrix x = chain_adjacency(4);
  x(0, 3) = x(3, 0) = 1.0;
  return x;
}

inline bool is_binary_adjacency(const RealMatrix& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (x(i, j) != 0.0 && x(i, j) != 1.0) return false;
  return true;
}

/// Canonical cluster graph Z = X + i e^{-2 alpha} I_n.
inline GraphMatrix cluster_graph(const RealMatrix& x, double alpha) {
  if (x.rows() != x.cols() || x.rows() == 0) {
    fail(ErrorKind::kDimension, "cluster_graph: adjacency must be square");
  }
  if (detail::max_abs(x - x.transpose()) >
      1e-12 * std::max(1.0, detail::max_abs(x))) {
    fail(ErrorKind::kDomain, "cluster_graph: adjacency is not symmetric");
  }
  const auto n = x.rows();
  return GraphMatrix(x, std::exp(-2.0 * alpha) * RealMatrix::Identity(n, n));
}

/// P = i I_n, R = 0, Gamma = 0. Gives M = -Y for any graph.
inline SynthesisParams default_cluster_params(int n) {
  if (n < 1) fail(ErrorKind::kDimension, "default_cluster_params: n must be >= 1");
  return SynthesisParams(Complex(0, 1) * ComplexMatrix::Identity(n, n),
                         RealMatrix::Zero(n, n), RealMatrix::Zero(n, n));
}

/// Two-mode squeezed state: X = 0, Y = [[cosh 2a, -sinh 2a], [-sinh 2a, cosh 2a]],
/// realized by P = i [[cosh a, sinh a], [sinh a, cosh a]], R = 0, Gamma = 0.
inline PresetSpec tms_preset(double alpha) {
  const double c2 = std::cosh(2 * alpha), s2 = std::sinh(2 * alpha);
  const double c1 = std::cosh(alpha), s1 = std::sinh(alpha);
  RealMatrix y(2, 2);
  y << c2, -s2, -s2, c2;
  ComplexMatrix p(2, 2);
  p << Complex(0, c1), Complex(0, s1), Complex(0, s1), Complex(0, c1);
  return {"tms", GraphMatrix(RealMatrix::Zero(2, 2), y),
          SynthesisParams(p, RealMatrix::Zero(2, 2), RealMatrix::Zero(2, 2)),
          "two-mode squeezed state, alpha = " + std::to_string(alpha) +
              "; channels L1 = cosh(a) a1 - sinh(a) a2^*, L2 = cosh(a) a2 - "
              "sinh(a) a1^*, H = 0"};
}

/// Single-mode damped cavity da = (i delta - kappa/2) a dt - sqrt(kappa) dA.
/// Vacuum target, P = i sqrt(kappa/2), detuning carried by R = -delta.
inline PresetSpec cavity_preset(double kappa, double delta = 0.0) {
  if (!(kappa > 0)) {
    fail(ErrorKind::kDomain, "cavity_preset: kappa must be > 0");
  }
  ComplexMatrix p(1, 1);
  p(0, 0) = Complex(0, std::sqrt(kappa / 2.0));
  RealMatrix r(1, 1);
  r(0, 0) = -delta;
  return {"cavity", GraphMatrix::vacuum(1),
          SynthesisParams(p, r, RealMatrix::Zero(1, 1)),
          "damped cavity, kappa = " + std::to_string(kappa) +
              ", detuning = " + std::to_string(delta)};
}

inline PresetSpec vacuum_preset(int n = 1) {
  return {"vacuum", GraphMatrix::vacuum(n), default_cluster_params(n),
          "vacuum target with P = i I"};
}

inline PresetSpec cluster_preset(const std::string& name, double alpha) {
  RealMatrix x;
  if (name == "chain4") {
    x = chain_adjacency(4);
  } else if (name == "tshape4") {
    x = tshape_adjacency();
  } else if (name == "square4") {
    x = square_adjacency();
  } else {
    fail(ErrorKind::kDomain, "cluster_preset: unknown graph '" + name + "'");
  }
  return {name, cluster_graph(x, alpha), default_cluster_params(4),
          "canonical cluster state, Z = X + i exp(-2 alpha) I, alpha = " +
              std::to_string(alpha) + "; P = i I is a default choice"};
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"chain4", "tshape4", "square4",
                                                 "tms",    "cavity",  "vacuum"};
  return names;
}

struct PresetArgs {
  double alpha = 1.0;
  double kappa = 2.0;
  double delta = 0.0;
  int modes = 1;
};

inline PresetSpec preset_by_name(const std::string& name, const PresetArgs& args = {}) {
  if (name == "tms") return tms_preset(args.alpha);
  if (name == "cavity") return cavity_preset(args.kappa, args.delta);
  if (name == "vacuum") return vacuum_preset(args.modes);
  return cluster_preset(name, args.alpha);
}

}  // namespace gdiss
