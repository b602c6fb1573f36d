#pragma once

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "quadrange/certs.hpp"
#include "quadrange/numrange.hpp"
#include "quadrange/quadform.hpp"
#include "quadrange/quadmap.hpp"

namespace quadrange {

using json = nlohmann::ordered_json;

// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path.string());
  return ss.str();
}

// Write-to-temp then rename, so readers never observe a half-written file.
inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed on " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("rename to " + path.string() + " failed");
  }
}

inline json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError(what + ": not valid JSON");
  return j;
}

// Matrix format {"n": int, "rows": [[...], ...]}; the reader symmetrizes.
inline SymMatrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("n") || !j.contains("rows"))
    throw IoError(what + ": expected object with \"n\" and \"rows\"");
  if (!j["n"].is_number_integer())
    throw IoError(what + ": \"n\" must be an integer");
  const int n = j["n"].get<int>();
  if (n < 1) throw IoError(what + ": \"n\" must be positive");
  const json& rows = j["rows"];
  if (!rows.is_array() || static_cast<int>(rows.size()) != n)
    throw IoError(what + ": \"rows\" must hold " + std::to_string(n) +
                  " rows");
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(n) * n);
  for (const json& row : rows) {
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw IoError(what + ": each row must hold " + std::to_string(n) +
                    " numbers");
    for (const json& cell : row) {
      if (!cell.is_number()) throw IoError(what + ": non-numeric entry");
      flat.push_back(cell.get<double>());
    }
  }
  try {
    return SymMatrix::from_rows(n, flat);
  } catch (const InvalidInput& e) {
    throw IoError(what + ": " + e.what());
  }
}

inline json matrix_to_json(const SymMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"n", m.dim()}, {"rows", std::move(rows)}};
}

// CSV matrix: n lines of n comma-separated decimals.
inline SymMatrix matrix_from_csv(const std::string& text,
                                 const std::string& what) {
  std::vector<double> flat;
  int n = -1, nrows = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    int count = 0;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() &&
               std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        flat.push_back(v);
      } catch (const std::exception&) {
        throw IoError(what + ": bad CSV number '" + cell + "'");
      }
      ++count;
    }
    if (n == -1) n = count;
    if (count != n) throw IoError(what + ": ragged CSV rows");
    ++nrows;
  }
  if (nrows == 0) throw IoError(what + ": empty CSV");
  if (nrows != n) throw IoError(what + ": CSV must be square");
  try {
    return SymMatrix::from_rows(n, flat);
  } catch (const InvalidInput& e) {
    throw IoError(what + ": " + e.what());
  }
}

inline std::string matrix_to_csv(const SymMatrix& m) {
  std::string out;
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = 0; j < m.dim(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

// Dispatch on extension: .json or .csv.
inline SymMatrix read_matrix(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const std::string ext = path.extension().string();
  if (ext == ".json")
    return matrix_from_json(parse_json(text, path.string()), path.string());
  if (ext == ".csv") return matrix_from_csv(text, path.string());
  throw IoError(path.string() + ": unknown matrix extension '" + ext + "'");
}

inline Vec vec_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw IoError(what + ": expected an array");
  Vec v;
  v.reserve(j.size());
  for (const json& cell : j) {
    if (!cell.is_number()) throw IoError(what + ": non-numeric entry");
    v.push_back(cell.get<double>());
  }
  return v;
}

// QuadForm format {"A": matrix, "a": [...], "b": real}.
inline QuadForm quadform_from_json(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("A") || !j.contains("a") ||
      !j.contains("b"))
    throw IoError(what + ": expected object with \"A\", \"a\", \"b\"");
  if (!j["b"].is_number()) throw IoError(what + ": \"b\" must be a number");
  try {
    return QuadForm(matrix_from_json(j["A"], what + ".A"),
                    vec_from_json(j["a"], what + ".a"), j["b"].get<double>());
  } catch (const InvalidInput& e) {
    throw IoError(what + ": " + e.what());
  }
}

inline json quadform_to_json(const QuadForm& phi) {
  return json{{"A", matrix_to_json(phi.A)}, {"a", phi.a}, {"b", phi.b}};
}

inline QuadForm read_quadform(const std::filesystem::path& path) {
  return quadform_from_json(parse_json(read_text_file(path), path.string()),
                            path.string());
}

inline json range_sample_to_json(const RangeSample& s) {
  return json{{"dim_out", s.dim_out},
              {"points", s.points},
              {"generators", s.generators}};
}

inline std::string range_sample_to_csv(const RangeSample& s) {
  std::string out;
  for (const Vec& p : s.points) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) out += ',';
      out += format_double(p[k]);
    }
    out += '\n';
  }
  return out;
}

inline std::string gap_table_to_csv(const std::vector<GapRow>& rows) {
  std::string out = "N,best_residual,witness_norm\n";
  for (const GapRow& r : rows) {
    out += std::to_string(r.N);
    out += ',';
    out += format_double(r.best_residual);
    out += ',';
    out += format_double(r.witness_norm);
    out += '\n';
  }
  return out;
}

// S-procedure instance: three matrices, their bounds, a Slater point, and
// whether constraint two is an equality.
struct SProcInstance {
  SymMatrix A0, A1, A2;
  double alpha0 = 0.0, alpha1 = 0.0, alpha2 = 0.0;
  Vec slater;
  bool equality = false;
};

inline SProcInstance sproc_instance_from_json(const json& j,
                                              const std::string& what) {
  for (const char* key : {"A0", "A1", "A2", "alpha", "slater"})
    if (!j.is_object() || !j.contains(key))
      throw IoError(what + ": missing \"" + key + "\"");
  const Vec alpha = vec_from_json(j["alpha"], what + ".alpha");
  if (alpha.size() != 3)
    throw IoError(what + ": \"alpha\" must hold three numbers");
  SProcInstance inst;
  inst.A0 = matrix_from_json(j["A0"], what + ".A0");
  inst.A1 = matrix_from_json(j["A1"], what + ".A1");
  inst.A2 = matrix_from_json(j["A2"], what + ".A2");
  inst.alpha0 = alpha[0];
  inst.alpha1 = alpha[1];
  inst.alpha2 = alpha[2];
  inst.slater = vec_from_json(j["slater"], what + ".slater");
  if (j.contains("equality")) {
    if (!j["equality"].is_boolean())
      throw IoError(what + ": \"equality\" must be a boolean");
    inst.equality = j["equality"].get<bool>();
  }
  return inst;
}

inline json sproc_instance_to_json(const SProcInstance& inst) {
  return json{{"A0", matrix_to_json(inst.A0)},
              {"A1", matrix_to_json(inst.A1)},
              {"A2", matrix_to_json(inst.A2)},
              {"alpha", Vec{inst.alpha0, inst.alpha1, inst.alpha2}},
              {"slater", inst.slater},
              {"equality", inst.equality}};
}

// S-lemma instance: planar criterion plus the two forms.
struct SLemmaInstance {
  SymMatrix Theta;
  Vec v;
  double t = 0.0;
  QuadForm phi1, phi2;

  QuadCriterion criterion() const { return QuadCriterion(Theta, v, t); }
};

inline SLemmaInstance slemma_instance_from_json(const json& j,
                                                const std::string& what) {
  for (const char* key : {"Theta", "v", "t", "phi1", "phi2"})
    if (!j.is_object() || !j.contains(key))
      throw IoError(what + ": missing \"" + key + "\"");
  if (!j["t"].is_number()) throw IoError(what + ": \"t\" must be a number");
  SLemmaInstance inst;
  inst.Theta = matrix_from_json(j["Theta"], what + ".Theta");
  inst.v = vec_from_json(j["v"], what + ".v");
  inst.t = j["t"].get<double>();
  inst.phi1 = quadform_from_json(j["phi1"], what + ".phi1");
  inst.phi2 = quadform_from_json(j["phi2"], what + ".phi2");
  return inst;
}

inline json slemma_instance_to_json(const SLemmaInstance& inst) {
  return json{{"Theta", matrix_to_json(inst.Theta)},
              {"v", inst.v},
              {"t", inst.t},
              {"phi1", quadform_to_json(inst.phi1)},
              {"phi2", quadform_to_json(inst.phi2)}};
}

// Certificate reports share one envelope:
// {"kind", "multipliers", "slacks", "verified", "evidence"}.
inline json sproc_outcome_to_json(const SProcOutcome& out) {
  json j;
  j["kind"] = "sproc";
  if (out.certificate) {
    const SProcCertificate& c = *out.certificate;
    j["multipliers"] = {{"tau1", c.tau1}, {"tau2", c.tau2}};
    j["slacks"] = {{"operator", c.slack_operator},
                   {"scalar", c.slack_scalar}};
    j["verified"] = true;
    j["evidence"] = {{"tau2_sign_unrestricted", c.tau2_sign_unrestricted}};
  } else {
    j["multipliers"] = nullptr;
    j["slacks"] = nullptr;
    j["verified"] = false;
    j["evidence"] = {{"best_tau1", out.best_tau1},
                     {"best_tau2", out.best_tau2},
                     {"best_value", out.best_value},
                     {"tau2_sign_unrestricted", out.tau2_sign_unrestricted}};
  }
  return j;
}

inline json slemma_outcome_to_json(const SLemmaOutcome& out) {
  json j;
  j["kind"] = "slemma";
  if (out.kind == SLemmaKind::Certificate) {
    const SLemmaCertificate& c = *out.certificate;
    j["multipliers"] = {{"alpha", c.alpha}, {"beta", c.beta}};
    j["slacks"] = {{"min_over_z", c.min_over_z},
                   {"min_over_x", c.min_over_x}};
    j["verified"] = true;
    j["evidence"] = {{"separator", c.separator}, {"lambda", c.lambda}};
  } else if (out.kind == SLemmaKind::Counterexample) {
    j["multipliers"] = nullptr;
    j["slacks"] = nullptr;
    j["verified"] = false;
    j["evidence"] = {{"witness_x", out.counterexample_x},
                     {"criterion_value", out.counterexample_value},
                     {"note", out.evidence}};
  } else {
    j["multipliers"] = nullptr;
    j["slacks"] = nullptr;
    j["verified"] = false;
    j["evidence"] = {{"note", out.evidence}};
  }
  return j;
}

}  // namespace quadrange
