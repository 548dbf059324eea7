#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"
#include "effects.hpp"
#include "matrix.hpp"
#include "operation.hpp"
#include "witness.hpp"

// Effect-set files:
//   {"d": int, "n": int, "effects": [matrix, ...], ...extra keys ignored}
// matrix = list of rows, entry = [re, im], doubles printed with 17 significant
// digits so that parsing reproduces every bit.

namespace lueders::io {

using json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void append_matrix(std::string& out, const ComplexMatrix& m, const std::string& indent) {
  out += "[\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += indent + "  [";
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ", ";
      out += "[" + format_double(m(i, j).real()) + ", " + format_double(m(i, j).imag()) + "]";
    }
    out += i + 1 < m.rows() ? "],\n" : "]\n";
  }
  out += indent + "]";
}

/// Serializes effect matrices; `extra` (an object, possibly empty) is emitted
/// between "n" and "effects".
inline std::string effect_set_text(const std::vector<ComplexMatrix>& effects, const json& extra = json::object()) {
  if (effects.empty()) throw Error(ErrorCode::InvalidArgument, "no effects to serialize");
  std::string out = "{\n";
  out += "  \"d\": " + std::to_string(effects.front().rows()) + ",\n";
  out += "  \"n\": " + std::to_string(effects.size()) + ",\n";
  for (const auto& [key, value] : extra.items()) out += "  " + json(key).dump() + ": " + value.dump() + ",\n";
  out += "  \"effects\": [\n";
  for (std::size_t i = 0; i < effects.size(); ++i) {
    out += "    ";
    append_matrix(out, effects[i], "    ");
    out += i + 1 < effects.size() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

inline std::string effect_set_text(const EffectSet& set, const json& extra = json::object()) {
  std::vector<ComplexMatrix> ms;
  for (const auto& e : set.effects()) ms.push_back(e.matrix());
  return effect_set_text(ms, extra);
}

inline ComplexMatrix matrix_from_json(const json& j, std::size_t expected_dim = 0) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, "matrix must be a nonempty list of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw Error(ErrorCode::ParseError, "matrix rows must be nonempty lists");
  if (expected_dim != 0 && (rows != expected_dim || cols != expected_dim)) {
    throw Error(ErrorCode::ParseError, "expected a " + std::to_string(expected_dim) + "x" +
                                           std::to_string(expected_dim) + " matrix");
  }
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != cols) throw Error(ErrorCode::ParseError, "ragged matrix row " + std::to_string(i));
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& e = row[c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        throw Error(ErrorCode::ParseError, "entry (" + std::to_string(i) + "," + std::to_string(c) + ") must be [re, im]");
      }
      m(i, c) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  if (!m.is_finite()) throw Error(ErrorCode::ParseError, "non-finite entry");
  return m;
}

inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back({m(i, c).real(), m(i, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

/// Effect matrices from effect-set JSON text. Shape is checked here; effect
/// validity is left to build_effect_set.
inline std::vector<ComplexMatrix> parse_effect_matrices(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "effect set must be a JSON object");
  for (const char* key : {"d", "n", "effects"}) {
    if (!doc.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing key \"") + key + "\"");
  }
  if (!doc["d"].is_number_unsigned() || !doc["n"].is_number_unsigned()) {
    throw Error(ErrorCode::ParseError, "\"d\" and \"n\" must be nonnegative integers");
  }
  const auto d = doc["d"].get<std::size_t>();
  const auto n = doc["n"].get<std::size_t>();
  if (d == 0 || n == 0) throw Error(ErrorCode::ParseError, "\"d\" and \"n\" must be positive");
  const auto& effects = doc["effects"];
  if (!effects.is_array() || effects.size() != n) {
    throw Error(ErrorCode::ParseError, "\"effects\" must list exactly n matrices");
  }
  std::vector<ComplexMatrix> ms;
  ms.reserve(n);
  for (const auto& e : effects) ms.push_back(matrix_from_json(e, d));
  return ms;
}

/// Operator file: either a bare matrix or {"matrix": matrix, ...}.
inline ComplexMatrix parse_operator(const std::string& text, std::size_t expected_dim = 0) {
  const json doc = parse_json(text);
  if (doc.is_object()) {
    if (!doc.contains("matrix")) throw Error(ErrorCode::ParseError, "operator object needs a \"matrix\" key");
    return matrix_from_json(doc["matrix"], expected_dim);
  }
  return matrix_from_json(doc, expected_dim);
}

inline std::string operator_text(const ComplexMatrix& m) {
  std::string out = "{\n  \"d\": " + std::to_string(m.rows()) + ",\n  \"matrix\": ";
  append_matrix(out, m, "  ");
  out += "\n}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const TheoremReport& r) {
  return {{"theorem", std::string(claim_id(r.theorem))},
          {"fixed_dim", r.fixed_space_dim},
          {"target_dim", r.target_space_dim},
          {"distance", r.projector_distance},
          {"verdict", r.verdict}};
}

inline json to_json(const BinIndex& b) { return b.ks; }

inline json to_json(const WitnessCertificate& c, bool full = false) {
  json j = {{"m", c.m}, {"k", c.k}, {"j", c.j}, {"block_norm", c.block_norm}};
  if (full) {
    j["left_projector"] = matrix_to_json(c.left_projector);
    j["right_projector"] = matrix_to_json(c.right_projector);
  }
  return j;
}

inline json to_json(const ContractionReport& r, bool full = false) {
  json j = {{"p", r.p},
            {"m", r.m},
            {"n", r.n},
            {"k", r.k},
            {"j", r.j},
            {"coarse_left", to_json(r.coarse_left)},
            {"coarse_right", to_json(r.coarse_right)},
            {"refined_left", to_json(r.refined_left)},
            {"refined_right", to_json(r.refined_right)},
            {"bound", r.bound},
            {"bound_without_p_factor", r.bound_without_p_factor},
            {"y_norm", r.y_norm},
            {"image_norm", r.image_norm},
            {"achieved_ratio", r.achieved_ratio}};
  if (full) {
    j["Y"] = matrix_to_json(r.y);
    j["P"] = matrix_to_json(r.p_projector);
    j["Q"] = matrix_to_json(r.q_projector);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to a sibling temporary, then renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename onto " + path.string());
  }
}

}  // namespace lueders::io
