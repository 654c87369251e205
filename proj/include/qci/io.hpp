// io.hpp: JSON matrix/Kraus files and tabular CSV/JSON result output

#pragma once

#include "qci/linalg.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace qci::io {

using Json = nlohmann::ordered_json;

/// Ten significant digits, shortest form ("%.10g").
inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

/// The double that prints as format_number(x) under shortest round-trip output.
inline double rounded(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(format_number(x).c_str(), nullptr);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("file '" + path + "': JSON parse error: " + e.what());
  }
}

namespace detail {

[[noreturn]] inline void field_error(const std::string& where, const std::string& field, const std::string& what) {
  throw std::invalid_argument(where + ": field '" + field + "' " + what);
}

inline std::vector<std::vector<double>> read_rows(const Json& j, const std::string& where, const std::string& field) {
  if (!j.contains(field)) field_error(where, field, "is missing");
  const Json& a = j.at(field);
  if (!a.is_array() || a.empty()) field_error(where, field, "must be a nonempty array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (!a[r].is_array()) field_error(where, field, "row " + std::to_string(r) + " is not an array");
    std::vector<double> row;
    for (const auto& v : a[r]) {
      if (!v.is_number()) field_error(where, field, "row " + std::to_string(r) + " has a non-numeric entry");
      row.push_back(v.get<double>());
    }
    if (!rows.empty() && row.size() != rows.front().size())
      field_error(where, field, "rows have unequal lengths");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline std::optional<Dims> read_dims(const Json& j, const std::string& where) {
  if (!j.contains("dims")) return std::nullopt;
  const Json& d = j.at("dims");
  if (!d.is_array() || d.empty()) detail::field_error(where, "dims", "must be a nonempty array");
  Dims out;
  for (const auto& v : d) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
      detail::field_error(where, "dims", "entries must be positive integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

/// {"re": [[...]], "im": [[...]]}; "im" defaults to zero.
inline ComplexMatrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  const auto re = detail::read_rows(j, where, "re");
  std::vector<std::vector<double>> im;
  if (j.contains("im")) im = detail::read_rows(j, where, "im");
  const std::size_t rows = re.size(), cols = re.front().size();
  if (!im.empty() && (im.size() != rows || im.front().size() != cols))
    detail::field_error(where, "im", "shape differs from 're'");
  ComplexMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = Complex(re[r][c], im.empty() ? 0.0 : im[r][c]);
  if (!all_finite(m)) throw std::invalid_argument(where + ": non-finite matrix entry");
  return m;
}

inline Json matrix_to_json(const ComplexMatrix& m, const std::optional<Dims>& dims = std::nullopt) {
  Json j = Json::object();
  if (dims) j["dims"] = *dims;
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ii = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

struct MatrixFile {
  ComplexMatrix matrix;
  std::optional<Dims> dims;
};

inline MatrixFile load_matrix_file(const std::string& path) {
  const Json j = read_json_file(path);
  const std::string where = "file '" + path + "'";
  return {matrix_from_json(j, where), read_dims(j, where)};
}

struct KrausFile {
  std::vector<ComplexMatrix> ops;
  std::optional<Dims> dims;
};

/// {"dims": [...], "kraus": [{"re": ..., "im": ...}, ...]}
inline KrausFile load_kraus_file(const std::string& path) {
  const Json j = read_json_file(path);
  const std::string where = "file '" + path + "'";
  if (!j.is_object() || !j.contains("kraus")) detail::field_error(where, "kraus", "is missing");
  const Json& list = j.at("kraus");
  if (!list.is_array() || list.empty()) detail::field_error(where, "kraus", "must be a nonempty array of matrices");
  KrausFile out;
  for (std::size_t n = 0; n < list.size(); ++n)
    out.ops.push_back(matrix_from_json(list[n], where + " kraus[" + std::to_string(n) + "]"));
  out.dims = read_dims(j, where);
  return out;
}

using Cell = std::variant<double, std::string, bool, std::uint64_t>;

/// Rows of named columns plus scalar metadata; serializes to CSV (header,
/// '\n' line endings) or JSON {"command", meta..., "rows": [...]}.
struct Table {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  Json meta = Json::object();

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("table row width mismatch");
    rows.push_back(std::move(row));
  }
};

inline std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return format_number(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::uint64_t>) return std::to_string(v);
        else {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string q = "\"";
          for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          return q + "\"";
        }
      },
      c);
}

inline Json json_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return rounded(v);
        else return v;
      },
      c);
}

inline void write_csv(const Table& t, std::ostream& os) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
    os << '\n';
  }
}

inline Json to_json(const Table& t) {
  Json j = Json::object();
  j["command"] = t.command;
  for (const auto& [k, v] : t.meta.items()) j[k] = v;
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json o = Json::object();
    for (std::size_t c = 0; c < row.size(); ++c) o[t.columns[c]] = json_cell(row[c]);
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline void write_json(const Table& t, std::ostream& os) { os << to_json(t).dump(2) << '\n'; }

}  // namespace qci::io
