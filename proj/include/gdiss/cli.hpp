#pragma once

// Command implementations behind the gdiss executable. Each command returns
// its JSON report, an optional CSV table and the process exit code:
//
//   0 pass, 2 input error, 3 verification failure, 4 numerical/stability failure.

#include <chrono>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gdiss/dynamics.hpp"
#include "gdiss/memory.hpp"
#include "gdiss/nullifier.hpp"
#include "gdiss/presets.hpp"
#include "gdiss/problem.hpp"
#include "gdiss/states.hpp"
#include "gdiss/synthesis.hpp"

namespace gdiss::cli {

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitVerify = 3, kExitNumerical = 4 };

inline constexpr const char* kTolEnv = "GAUSSDISS_TOL_OVERRIDE";
inline constexpr const char* kTolEnvFallback = "TOOL_TOL_OVERRIDE";

struct CliOptions {
  std::optional<double> kappa;
  std::optional<double> delta;
  std::optional<double> horizon;
  std::optional<double> step;
  std::optional<double> omega_min;
  std::optional<double> omega_max;
  std::optional<int> omega_count;
  std::optional<double> v0_scale;
  std::optional<int> record_stride;
  std::vector<double> alphas;
  std::string graph;   // preset graph name for tradeoff/memory
  std::string preset;  // preset name for the preset command
  int modes = 1;
};

struct CommandResult {
  int exit_code = kExitOk;
  Json report = Json::object();
  std::string csv;
  std::string text;  // raw stdout payload (preset command)
};

struct Tolerances {
  double G_condition = 1e-10;   // relative to max(1, |G|)
  double intertwining = 1e-10;  // relative to the residual scale
  double eig_formula = 1e-8;
  double unitarity = 1e-10;
  double steady_state = 1e-8;   // relative Frobenius gap
  double memory = 1e-10;

  Tolerances scaled(double s) const {
    return {G_condition * s, intertwining * s, eig_formula * s,
            unitarity * s,   steady_state * s, memory * s};
  }

  Json to_json() const {
    Json j;
    j["G_condition"] = G_condition;
    j["intertwining"] = intertwining;
    j["eig_formula"] = eig_formula;
    j["unitarity"] = unitarity;
    j["steady_state"] = steady_state;
    j["memory"] = memory;
    return j;
  }
};

/// Global tolerance scale from the environment; 1 when unset.
inline double tolerance_scale() {
  const char* raw = std::getenv(kTolEnv);
  if (raw == nullptr) raw = std::getenv(kTolEnvFallback);
  if (raw == nullptr || *raw == '\0') return 1.0;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(v > 0) || !std::isfinite(v)) {
    throw InputError(kTolEnv, std::string("expected a positive number, got '") + raw + "'");
  }
  return v;
}

namespace detail {

inline std::vector<double> grid_for(const ProblemOptions& po, const CliOptions& co) {
  return frequency_grid(co.omega_min.value_or(po.omega_min.value_or(1e-3)),
                        co.omega_max.value_or(po.omega_max.value_or(1e3)),
                        co.omega_count.value_or(po.omega_count.value_or(100)), true);
}

inline SystemRealization realize(const ProblemFile& pf) {
  return pf.G ? assemble_with_G(pf.params, pf.graph, *pf.G) : assemble(pf.params, pf.graph);
}

inline Json check_entry(const char* status, std::optional<double> value, double tol) {
  Json j;
  j["status"] = status;
  j["value"] = value ? Json(*value) : Json(nullptr);
  j["tolerance"] = tol;
  return j;
}

inline std::string csv_join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

inline RealMatrix adjacency_by_name(const std::string& name) {
  if (name == "chain4") return chain_adjacency(4);
  if (name == "tshape4") return tshape_adjacency();
  if (name == "square4") return square_adjacency();
  throw InputError("--graph", "unknown graph '" + name + "' (chain4, tshape4, square4)");
}

}  // namespace detail

inline CommandResult cmd_synth(const ProblemFile& pf, const CliOptions&, const Tolerances&) {
  const SystemRealization sys = detail::realize(pf);
  const NullifierSystem ns = build_nullifier_system(pf.params, pf.graph);
  const Spectrum eig_a = eigenvalues_real(sys.A);
  const Spectrum eig_m = eigenvalues_complex(ns.M);

  CommandResult out;
  Json& r = out.report["results"];
  r["n"] = pf.graph.modes();
  r["m"] = pf.params.channels();
  r["C"] = to_json(sys.C);
  r["G"] = to_json(sys.G);
  r["A"] = to_json(sys.A);
  r["D"] = to_json(sys.D);
  r["Q"] = to_json(sys.Q);
  r["M"] = to_json(ns.M);
  r["rank_ok"] = sys.rank_ok;
  r["controllability_rank"] = sys.controllability_rank;
  r["eig_A"] = to_json(eig_a.eigenvalues);
  r["eig_M"] = to_json(eig_m.eigenvalues);
  r["A_stability"] = to_string(classify_spectrum(eig_a, kHurwitzMargin).classification);
  out.report["passed"] = sys.rank_ok;
  out.exit_code = sys.rank_ok ? kExitOk : kExitInput;
  return out;
}

inline CommandResult cmd_verify(const ProblemFile& pf, const CliOptions& co,
                                const Tolerances& tol) {
  const SystemRealization sys = detail::realize(pf);
  const NullifierSystem ns = build_nullifier_system(pf.params, pf.graph);
  Json checks = Json::object();

  const double g_res = verify_G_condition(sys, pf.graph);
  const double g_tol = tol.G_condition * std::max(1.0, sys.G.norm());
  checks["G_condition"] = detail::check_entry(g_res <= g_tol ? "pass" : "fail", g_res, g_tol);

  const IntertwiningResiduals inter = verify_intertwining(sys, ns, pf.graph);
  const double i_tol = tol.intertwining * inter.scale;
  checks["intertwining"] =
      detail::check_entry(inter.max() <= i_tol ? "pass" : "fail", inter.max(), i_tol);

  const NullifierStabilityReport stab = check_nullifier_stability(pf.params, pf.graph);
  checks["rank"] = detail::check_entry(stab.rank_ok ? "pass" : "fail",
                                       static_cast<double>(stab.rank), pf.graph.modes());
  checks["M_hurwitz"] = detail::check_entry(stab.M_hurwitz ? "pass" : "fail",
                                            stab.max_real_part, -kHurwitzMargin);
  checks["rank_stability_equivalence"] =
      detail::check_entry(stab.consistent() ? "pass" : "fail", std::nullopt, 0.0);
  if (stab.eig_formula_max_residual) {
    const double v = *stab.eig_formula_max_residual;
    checks["eig_formula"] =
        detail::check_entry(v <= tol.eig_formula ? "pass" : "fail", v, tol.eig_formula);
  } else {
    checks["eig_formula"] = detail::check_entry("skipped", std::nullopt, tol.eig_formula);
  }

  if (stab.M_hurwitz) {
    const auto grid = detail::grid_for(pf.options, co);
    const double dev = unitarity_sweep(ns, grid);
    checks["unitarity"] =
        detail::check_entry(dev <= tol.unitarity ? "pass" : "fail", dev, tol.unitarity);
  } else {
    checks["unitarity"] = detail::check_entry("skipped", std::nullopt, tol.unitarity);
  }

  if (sys.rank_ok) {
    try {
      const SteadyStateCertificate cert = certify_steady_state(sys, pf.graph);
      checks["steady_state"] = detail::check_entry(
          cert.frobenius_gap <= tol.steady_state ? "pass" : "fail", cert.frobenius_gap,
          tol.steady_state);
    } catch (const NotHurwitzError& e) {
      checks["steady_state"] =
          detail::check_entry("fail", e.max_real_part(), tol.steady_state);
    }
  } else {
    checks["steady_state"] = detail::check_entry("skipped", std::nullopt, tol.steady_state);
  }

  Json failing = Json::array();
  for (const auto& [name, entry] : checks.items()) {
    if (entry["status"] == "fail") failing.push_back(name);
  }
  CommandResult out;
  out.report["results"]["checks"] = checks;
  out.report["results"]["eig_pairs_evaluated"] = stab.evaluated_pairs;
  out.report["results"]["eig_pairs_skipped"] = stab.skipped_pairs;
  out.report["failing"] = failing;
  out.report["passed"] = failing.empty();
  out.exit_code = failing.empty() ? kExitOk : kExitVerify;
  return out;
}

inline CommandResult cmd_simulate(const ProblemFile& pf, const CliOptions& co,
                                  const Tolerances&) {
  const SystemRealization sys = detail::realize(pf);
  const int dim = 2 * pf.graph.modes();
  const HurwitzCheck stab = is_hurwitz(sys.A);
  if (!stab.hurwitz) {
    throw NotHurwitzError("simulate: A is not Hurwitz; there is no steady state to approach",
                          stab.max_real_part);
  }
  RealMatrix v0 = 0.5 * RealMatrix::Identity(dim, dim);
  if (co.v0_scale) {
    v0 = *co.v0_scale * RealMatrix::Identity(dim, dim);
  } else if (pf.options.V0) {
    v0 = *pf.options.V0;
  }
  const RealVector x0 = pf.options.x0.value_or(RealVector::Zero(dim));

  SimulationOptions so;
  so.horizon = co.horizon.value_or(pf.options.horizon.value_or(default_horizon(sys.A)));
  so.step = co.step.value_or(pf.options.step.value_or(default_step(sys.A)));
  if (co.record_stride) {
    so.record_stride = *co.record_stride;
  } else if (so.step > 0) {
    so.record_stride = std::max(1, static_cast<int>(std::ceil(so.horizon / so.step / 1000.0)));
  }
  const Trajectory traj = simulate(sys, pf.graph, v0, x0, so);

  CommandResult out;
  Json& r = out.report["results"];
  r["horizon"] = so.horizon;
  r["step"] = traj.step_used;
  r["steps"] = traj.steps;
  r["rows"] = traj.times.size();
  r["final_target_gap"] = traj.target_gap.back();
  r["final_nullifier_gap"] = traj.nullifier_gap.back();
  r["min_uncertainty_eig"] =
      *std::min_element(traj.min_uncertainty_eig.begin(), traj.min_uncertainty_eig.end());
  r["decay_rate_A"] = slowest_decay_rate(sys.A);
  try {
    r["convergence_time_M"] = convergence_time(build_nullifier_system(pf.params, pf.graph));
  } catch (const NotHurwitzError&) {
    r["convergence_time_M"] = nullptr;
  }
  r["final_V"] = to_json(traj.covariances.back());
  r["final_mean"] = to_json(traj.means.back());
  out.report["passed"] = true;

  std::vector<std::string> header = {"t", "target_gap", "nullifier_gap", "min_uncertainty_eig"};
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) header.push_back("V_" + std::to_string(i) + "_" + std::to_string(j));
  std::string csv = detail::csv_join(header);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::vector<std::string> row = {format_number(traj.times[k]), format_number(traj.target_gap[k]),
                                    format_number(traj.nullifier_gap[k]),
                                    format_number(traj.min_uncertainty_eig[k])};
    const RealMatrix& v = traj.covariances[k];
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) row.push_back(format_number(v(i, j)));
    csv += detail::csv_join(row);
  }
  out.csv = std::move(csv);
  return out;
}

inline CommandResult cmd_spectrum(const ProblemFile& pf, const CliOptions& co,
                                  const Tolerances& tol) {
  const NullifierSystem ns = build_nullifier_system(pf.params, pf.graph);
  const auto grid = detail::grid_for(pf.options, co);
  const auto samples = frequency_response(ns, grid);
  const auto m = ns.output_gain.rows();

  std::vector<std::string> header = {"omega", "unitarity_dev"};
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::string ij = std::to_string(i) + "_" + std::to_string(j);
      header.push_back("abs_F_" + ij);
      header.push_back("arg_F_" + ij);
    }
  }
  std::string csv = detail::csv_join(header);
  double worst = 0.0;
  for (const auto& s : samples) {
    worst = std::max(worst, s.unitarity_dev);
    std::vector<std::string> row = {format_number(s.omega), format_number(s.unitarity_dev)};
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        row.push_back(format_number(std::abs(s.F(i, j))));
        row.push_back(format_number(std::arg(s.F(i, j))));
      }
    }
    csv += detail::csv_join(row);
  }

  CommandResult out;
  Json& r = out.report["results"];
  r["points"] = samples.size();
  r["omega_min"] = grid.size() > 1 ? grid[1] : grid[0];
  r["omega_max"] = grid.back();
  r["max_unitarity_dev"] = worst;
  r["F_dc"] = to_json(samples.front().F);
  const bool ok = worst <= tol.unitarity;
  out.report["passed"] = ok;
  out.exit_code = ok ? kExitOk : kExitVerify;
  out.csv = std::move(csv);
  return out;
}

inline CommandResult cmd_tradeoff(const std::optional<ProblemFile>& pf, const CliOptions& co,
                                  const Tolerances&) {
  RealMatrix x;
  std::string source;
  if (!co.graph.empty()) {
    x = detail::adjacency_by_name(co.graph);
    source = co.graph;
  } else if (pf) {
    x = pf->graph.X();
    source = pf->name.empty() ? "file" : pf->name;
  } else {
    throw InputError("--graph", "tradeoff needs --graph NAME or --in FILE");
  }
  std::vector<double> alphas = co.alphas;
  if (alphas.empty() && pf) alphas = pf->options.alphas;
  if (alphas.empty()) alphas = {0.5, 1.0, 1.5, 2.0};

  const auto rows = tradeoff_sweep(x, alphas);
  const TradeoffSummary sum = summarize_tradeoff(rows);

  CommandResult out;
  Json& r = out.report["results"];
  r["graph"] = source;
  r["binary_adjacency"] = is_binary_adjacency(x);
  Json jrows = Json::array();
  std::string csv = detail::csv_join({"alpha", "epsilon", "T", "product"});
  for (const auto& row : rows) {
    Json jr;
    jr["alpha"] = row.alpha;
    jr["epsilon"] = row.epsilon;
    jr["T"] = row.T;
    jr["product"] = row.product;
    jr["rank_ok"] = row.rank_ok;
    jrows.push_back(std::move(jr));
    csv += detail::csv_join({format_number(row.alpha), format_number(row.epsilon),
                             format_number(row.T), format_number(row.product)});
  }
  r["rows"] = std::move(jrows);
  r["empirical_c"] = sum.min_product;
  r["max_product"] = sum.max_product;
  r["coefficient_of_variation"] = sum.coefficient_of_variation;
  r["flagged_rows"] = sum.flagged_rows;
  out.report["passed"] = sum.flagged_rows == 0;
  out.csv = std::move(csv);
  return out;
}

inline CommandResult cmd_memory(const std::optional<ProblemFile>& pf, const CliOptions& co,
                                const Tolerances& tol) {
  std::optional<GraphMatrix> graph;
  if (!co.graph.empty()) {
    PresetArgs args;
    if (!co.alphas.empty()) args.alpha = co.alphas.front();
    args.modes = co.modes;
    graph = preset_by_name(co.graph, args).graph;
  } else if (pf) {
    graph = pf->graph;
  } else {
    throw InputError("--graph", "memory needs --graph NAME or --in FILE");
  }
  const double kappa = co.kappa.value_or(pf ? pf->options.kappa.value_or(1.0) : 1.0);
  if (!(kappa > 0)) throw InputError("--kappa", "must be > 0");

  const MemoryRealization mem = build_memory(*graph, kappa);
  const int n = graph->modes();
  const RealMatrix eye = RealMatrix::Identity(2 * n, 2 * n);
  const double b_dev = gdiss::detail::max_abs(mem.B + 2 * kappa * eye);
  const double a_dev = gdiss::detail::max_abs(mem.A + 2 * kappa * kappa * eye);
  const auto probes = memory_probe_graphs(n);
  const bool independent = check_graph_independence(memory_builder(kappa), probes);
  const SteadyStateCertificate cert = certify_steady_state(mem.system, *graph);

  Json checks;
  checks["B_is_minus_2kappa_I"] =
      detail::check_entry(b_dev <= tol.memory * std::max(1.0, 2 * kappa) ? "pass" : "fail",
                          b_dev, tol.memory);
  checks["A_is_minus_2kappa2_I"] = detail::check_entry(
      a_dev <= tol.memory * std::max(1.0, 2 * kappa * kappa) ? "pass" : "fail", a_dev,
      tol.memory);
  checks["graph_independence"] =
      detail::check_entry(independent ? "pass" : "fail", std::nullopt, tol.memory);
  checks["steady_state"] = detail::check_entry(
      cert.frobenius_gap <= tol.steady_state ? "pass" : "fail", cert.frobenius_gap,
      tol.steady_state);

  bool ok = true;
  for (const auto& [name, entry] : checks.items()) ok = ok && entry["status"] == "pass";

  CommandResult out;
  Json& r = out.report["results"];
  r["kappa"] = kappa;
  r["n"] = n;
  r["P"] = to_json(mem.params.P());
  r["B"] = to_json(mem.B);
  r["A"] = to_json(mem.A);
  r["probe_graphs"] = static_cast<int>(probes.size());
  r["checks"] = std::move(checks);
  out.report["passed"] = ok;
  out.exit_code = ok ? kExitOk : kExitVerify;
  return out;
}

inline CommandResult cmd_preset(const CliOptions& co) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), co.preset) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw InputError("preset", "unknown preset '" + co.preset + "'; valid names: " + list);
  }
  PresetArgs args;
  if (!co.alphas.empty()) args.alpha = co.alphas.front();
  if (co.kappa) args.kappa = *co.kappa;
  if (co.delta) args.delta = *co.delta;
  args.modes = co.modes;
  const PresetSpec spec = preset_by_name(co.preset, args);
  Json options = Json::object();
  if (co.preset == "cavity") {
    options["kappa"] = args.kappa;
    options["delta"] = args.delta;
  } else if (co.preset != "vacuum") {
    options["alpha"] = Json::array({args.alpha});
  }
  CommandResult out;
  out.text = problem_to_json(spec.name, spec.notes, spec.graph, spec.params, options).dump(2) + "\n";
  return out;
}

/// Runs `command` end to end: parses the input (when the command takes one),
/// dispatches, and wraps the result in the common report envelope. Errors are
/// mapped onto exit codes rather than thrown.
inline CommandResult run_command(const std::string& command,
                                 const std::optional<std::string>& input_text,
                                 const CliOptions& co) {
  const auto started = std::chrono::steady_clock::now();
  CommandResult out;
  Json envelope;
  envelope["command"] = command;
  envelope["input_digest"] = input_text ? Json(digest(*input_text)) : Json(nullptr);

  auto finish = [&](CommandResult r) {
    Json full = envelope;
    for (auto& [k, v] : r.report.items()) full[k] = v;
    full["exit_code"] = r.exit_code;
    const auto elapsed = std::chrono::steady_clock::now() - started;
    full["duration_s"] = std::chrono::duration<double>(elapsed).count();
    r.report = std::move(full);
    return r;
  };
  auto error_result = [&](int code, const Error& e) {
    CommandResult r;
    r.exit_code = code;
    r.report["passed"] = false;
    r.report["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    return finish(std::move(r));
  };

  double scale = 1.0;
  std::optional<ProblemFile> problem;
  try {
    scale = tolerance_scale();
    if (input_text) problem = parse_problem(*input_text);
  } catch (const Error& e) {
    envelope["tol_override"] = nullptr;
    return error_result(kExitInput, e);
  }
  const Tolerances tol = Tolerances{}.scaled(scale);
  envelope["tol_override"] = scale == 1.0 && !std::getenv(kTolEnv) && !std::getenv(kTolEnvFallback)
                                 ? Json(nullptr)
                                 : Json(scale);
  envelope["tolerances"] = tol.to_json();

  const bool needs_file = command == "synth" || command == "verify" ||
                          command == "simulate" || command == "spectrum";
  if (needs_file && !problem) {
    return error_result(kExitInput, InputError("--in", command + " requires a problem file"));
  }

  try {
    if (command == "synth") return finish(cmd_synth(*problem, co, tol));
    if (command == "verify") return finish(cmd_verify(*problem, co, tol));
    if (command == "simulate") return finish(cmd_simulate(*problem, co, tol));
    if (command == "spectrum") return finish(cmd_spectrum(*problem, co, tol));
    if (command == "tradeoff") return finish(cmd_tradeoff(problem, co, tol));
    if (command == "memory") return finish(cmd_memory(problem, co, tol));
    if (command == "preset") return cmd_preset(co);
    return error_result(kExitInput, InputError("", "unknown command '" + command + "'"));
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::kStability:
      case ErrorKind::kNumerical:
      case ErrorKind::kDivergence:
        return error_result(kExitNumerical, e);
      case ErrorKind::kInternal:
        return error_result(kExitVerify, e);
      default:
        return error_result(kExitInput, e);
    }
  }
}

}  // namespace gdiss::cli
