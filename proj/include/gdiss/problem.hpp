#pragma once

// JSON problem files and matrix serialization.
//
// Real matrices are nested row-major arrays; complex entries are two-element
// arrays [re, im]. A problem file looks like
//
//   {
//     "name": "cavity", "notes": "...",
//     "n": 1, "m": 1,
//     "X": [[0]], "Y": [[1]],
//     "P": [[[0, 1]]],
//     "R": [[0]], "Gamma": [[0]],          (optional, default 0)
//     "G": [[...]],                        (optional override of the synthesized G)
//     "options": {"kappa": 1, "horizon": 20, "step": 0.01, "omega_min": 1e-3,
//                 "omega_max": 1e3, "omega_count": 100, "V0": [[...]],
//                 "x0": [...], "alpha": [0.5, 1.0]}
//   }

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdiss/linalg.hpp"
#include "gdiss/presets.hpp"
#include "gdiss/states.hpp"
#include "gdiss/synthesis.hpp"

namespace gdiss {

using Json = nlohmann::ordered_json;

class InputError : public Error {
 public:
  InputError(const std::string& path, const std::string& what)
      : Error(ErrorKind::kInput, path.empty() ? what : path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct ProblemOptions {
  std::optional<double> kappa;
  std::optional<double> horizon;
  std::optional<double> step;
  std::optional<double> omega_min;
  std::optional<double> omega_max;
  std::optional<int> omega_count;
  std::optional<RealMatrix> V0;
  std::optional<RealVector> x0;
  std::vector<double> alphas;
};

struct ProblemFile {
  std::string name;
  std::string notes;
  GraphMatrix graph;
  SynthesisParams params;
  std::optional<RealMatrix> G;
  ProblemOptions options;
};

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json to_json(const RealMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const RealVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Json to_json(const std::vector<Complex>& values) {
  Json out = Json::array();
  for (const auto& z : values) out.push_back(to_json(z));
  return out;
}

/// %.17g, which round-trips every double.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// FNV-1a, 64 bit, as 16 hex digits.
inline std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Json problem_to_json(const std::string& name, const std::string& notes,
                            const GraphMatrix& g, const SynthesisParams& params,
                            Json options = Json::object()) {
  Json out;
  out["name"] = name;
  out["notes"] = notes;
  out["n"] = g.modes();
  out["m"] = params.channels();
  out["X"] = to_json(g.X());
  out["Y"] = to_json(g.Y());
  out["P"] = to_json(params.P());
  out["R"] = to_json(params.R());
  out["Gamma"] = to_json(params.Gamma());
  if (!options.empty()) out["options"] = std::move(options);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline double number_at(const Json& v, const std::string& path) {
  if (!v.is_number()) throw InputError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(path, "non-finite number");
  return d;
}

inline RealMatrix real_matrix_at(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw InputError(path, "expected a non-empty array of rows");
  const auto rows = v.size();
  if (!v[0].is_array() || v[0].empty()) throw InputError(path + "/0", "expected a non-empty row");
  const auto cols = v[0].size();
  RealMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = path + "/" + std::to_string(i);
    if (!v[i].is_array() || v[i].size() != cols) {
      throw InputError(rp, "expected a row of length " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(i, j) = number_at(v[i][j], rp + "/" + std::to_string(j));
    }
  }
  return m;
}

inline ComplexMatrix complex_matrix_at(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw InputError(path, "expected a non-empty array of rows");
  const auto rows = v.size();
  if (!v[0].is_array() || v[0].empty()) throw InputError(path + "/0", "expected a non-empty row");
  const auto cols = v[0].size();
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = path + "/" + std::to_string(i);
    if (!v[i].is_array() || v[i].size() != cols) {
      throw InputError(rp, "expected a row of length " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const std::string ep = rp + "/" + std::to_string(j);
      const Json& e = v[i][j];
      if (e.is_number()) {
        m(i, j) = Complex(number_at(e, ep), 0.0);
      } else if (e.is_array() && e.size() == 2) {
        m(i, j) = Complex(number_at(e[0], ep + "/0"), number_at(e[1], ep + "/1"));
      } else {
        throw InputError(ep, "expected [re, im]");
      }
    }
  }
  return m;
}

inline RealVector real_vector_at(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw InputError(path, "expected a non-empty array");
  RealVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(i) = number_at(v[i], path + "/" + std::to_string(i));
  }
  return out;
}

inline void require_size(const RealMatrix& m, Eigen::Index r, Eigen::Index c,
                         const std::string& path) {
  if (m.rows() != r || m.cols() != c) {
    throw InputError(path, "expected " + std::to_string(r) + "x" + std::to_string(c) +
                               ", got " + std::to_string(m.rows()) + "x" +
                               std::to_string(m.cols()));
  }
}

inline void require_symmetric(const RealMatrix& m, double sign, const std::string& path,
                              const char* what) {
  if (detail::max_abs(m - sign * m.transpose()) > 1e-12 * std::max(1.0, detail::max_abs(m))) {
    throw InputError(path, std::string("not ") + what);
  }
}

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline ProblemOptions parse_options(const Json& o) {
  ProblemOptions out;
  if (!o.is_object()) throw InputError("/options", "expected an object");
  auto num = [&](const char* key) -> std::optional<double> {
    if (!o.contains(key)) return std::nullopt;
    return number_at(o.at(key), std::string("/options/") + key);
  };
  out.kappa = num("kappa");
  out.horizon = num("horizon");
  out.step = num("step");
  out.omega_min = num("omega_min");
  out.omega_max = num("omega_max");
  if (o.contains("omega_count")) {
    const Json& c = o.at("omega_count");
    if (!c.is_number_integer() || c.get<long long>() < 1) {
      throw InputError("/options/omega_count", "expected a positive integer");
    }
    out.omega_count = c.get<int>();
  }
  if (o.contains("V0")) out.V0 = real_matrix_at(o.at("V0"), "/options/V0");
  if (o.contains("x0")) out.x0 = real_vector_at(o.at("x0"), "/options/x0");
  if (o.contains("alpha")) {
    const Json& a = o.at("alpha");
    if (a.is_number()) {
      out.alphas.push_back(number_at(a, "/options/alpha"));
    } else {
      const RealVector v = real_vector_at(a, "/options/alpha");
      out.alphas.assign(v.data(), v.data() + v.size());
    }
  }
  return out;
}

}  // namespace detail

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte);
    throw InputError("", "malformed JSON at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + e.what());
  }
}

/// Parses and validates a problem file. Every failure is an InputError
/// naming the offending JSON path (or the line for syntax errors).
inline ProblemFile parse_problem(const Json& root) {
  using detail::require_size;
  if (!root.is_object()) throw InputError("/", "expected a JSON object");
  for (const char* key : {"X", "Y", "P"}) {
    if (!root.contains(key)) throw InputError(std::string("/") + key, "missing field");
  }
  const RealMatrix x = detail::real_matrix_at(root.at("X"), "/X");
  const auto n = x.rows();
  require_size(x, n, n, "/X");
  const RealMatrix y = detail::real_matrix_at(root.at("Y"), "/Y");
  require_size(y, n, n, "/Y");
  const ComplexMatrix p = detail::complex_matrix_at(root.at("P"), "/P");
  if (p.rows() != n) {
    throw InputError("/P", "expected " + std::to_string(n) + " rows, got " +
                               std::to_string(p.rows()));
  }
  const auto m = p.cols();
  if (root.contains("n")) {
    const Json& jn = root.at("n");
    if (!jn.is_number_integer() || jn.get<long long>() != n) {
      throw InputError("/n", "does not match the size of X (" + std::to_string(n) + ")");
    }
  }
  if (root.contains("m")) {
    const Json& jm = root.at("m");
    if (!jm.is_number_integer() || jm.get<long long>() != m) {
      throw InputError("/m", "does not match the column count of P (" +
                                 std::to_string(m) + ")");
    }
  }
  RealMatrix r = RealMatrix::Zero(n, n);
  RealMatrix gamma = RealMatrix::Zero(n, n);
  if (root.contains("R")) {
    r = detail::real_matrix_at(root.at("R"), "/R");
    require_size(r, n, n, "/R");
  }
  if (root.contains("Gamma")) {
    gamma = detail::real_matrix_at(root.at("Gamma"), "/Gamma");
    require_size(gamma, n, n, "/Gamma");
  }
  detail::require_symmetric(x, 1.0, "/X", "symmetric");
  detail::require_symmetric(y, 1.0, "/Y", "symmetric");
  detail::require_symmetric(r, 1.0, "/R", "symmetric");
  detail::require_symmetric(gamma, -1.0, "/Gamma", "skew-symmetric");

  std::optional<GraphMatrix> graph;
  try {
    graph.emplace(x, y);
  } catch (const Error& e) {
    throw InputError("/Y", e.what());
  }
  std::optional<SynthesisParams> params;
  try {
    params.emplace(p, r, gamma);
  } catch (const Error& e) {
    throw InputError("/P", e.what());
  }

  ProblemFile out{root.value("name", std::string()), root.value("notes", std::string()),
                  *graph, *params, std::nullopt, {}};
  if (root.contains("G")) {
    RealMatrix g = detail::real_matrix_at(root.at("G"), "/G");
    require_size(g, 2 * n, 2 * n, "/G");
    if (detail::max_abs(g - g.transpose()) > 1e-10 * std::max(1.0, detail::max_abs(g))) {
      throw InputError("/G", "not symmetric");
    }
    out.G = std::move(g);
  }
  if (root.contains("options")) out.options = detail::parse_options(root.at("options"));
  if (out.options.V0) require_size(*out.options.V0, 2 * n, 2 * n, "/options/V0");
  if (out.options.x0 && out.options.x0->size() != 2 * n) {
    throw InputError("/options/x0", "expected length " + std::to_string(2 * n));
  }
  return out;
}

inline ProblemFile parse_problem(const std::string& text) {
  return parse_problem(parse_json_text(text));
}

}  // namespace gdiss
