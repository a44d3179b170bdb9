/**
 * Copyright 2026 The npers Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "npers/conv.hpp"
#include "npers/errors.hpp"
#include "npers/layer.hpp"
#include "npers/metrics.hpp"

namespace npers::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kSnapshotFormat = "np-snapshot-v1";

/// 17 significant digits, enough for any double to read back unchanged.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline void dump(const Json& j, std::string& out, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(),
                                     [](const Json& e) { return e.is_structured(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat && indent >= 0 ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump(e, out, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Serialises JSON keeping insertion order, with every floating-point number
/// written to 17 significant digits. Non-finite numbers become null.
inline std::string dump_json(const Json& j, int indent = 2) {
  std::string out;
  detail::dump(j, out, indent, 0);
  return out;
}

/// Writes `contents` to a temporary file next to `path` and renames it
/// into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot open '" + tmp.string() + "' for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) throw FormatError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw FormatError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Snapshots

inline Json snapshot_to_json(const NetworkSnapshot& snap, bool strict = false) {
  Json j;
  j["format"] = kSnapshotFormat;
  j["step"] = snap.step;
  if (strict) j["strict"] = true;
  Json layers = Json::array();
  for (const auto& layer : snap.layers) {
    Json l;
    l["rows"] = layer.out_count();
    l["cols"] = layer.in_count();
    if (layer.is_sparse()) {
      Json entries = Json::array();
      for (const auto& e : layer.entries()) entries.push_back(Json::array({e.row, e.col, e.weight}));
      l["entries"] = std::move(entries);
    } else {
      const auto v = layer.dense_values();
      l["values"] = std::vector<double>(v.begin(), v.end());
    }
    layers.push_back(std::move(l));
  }
  j["layers"] = std::move(layers);
  return j;
}

namespace detail {

inline std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n' ? 1 : 0;
  return line;
}

inline double finite_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw FormatError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw FormatError(where + ": value is not finite");
  return d;
}

inline std::size_t count(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw FormatError(where + ": missing \"" + key + "\"");
  const auto& v = obj[key];
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
    throw FormatError(where + ": \"" + key + "\" must be a positive integer");
  }
  return v.get<std::size_t>();
}

}  // namespace detail

/// Parses a snapshot document. `origin` names the source in error messages.
inline NetworkSnapshot snapshot_from_text(std::string_view text, const std::string& origin = "snapshot") {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw FormatError(origin + ":" + std::to_string(detail::line_of(text, e.byte)) +
                      ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw FormatError(origin + ": top level must be an object");
  if (!j.contains("format") || j["format"] != kSnapshotFormat) {
    throw FormatError(origin + ": format tag must be \"" + std::string(kSnapshotFormat) + "\"");
  }
  NetworkSnapshot snap;
  if (j.contains("step")) {
    if (!j["step"].is_number_integer()) throw FormatError(origin + ": \"step\" must be an integer");
    snap.step = j["step"].get<std::int64_t>();
  }
  if (!j.contains("layers") || !j["layers"].is_array()) {
    throw FormatError(origin + ": \"layers\" must be an array");
  }
  const auto& layers = j["layers"];
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    const std::string where = origin + ": layer " + std::to_string(k);
    if (!l.is_object()) throw FormatError(where + ": must be an object");
    const std::size_t rows = detail::count(l, "rows", where);
    const std::size_t cols = detail::count(l, "cols", where);
    try {
      if (l.contains("values")) {
        const auto& v = l["values"];
        if (!v.is_array()) throw FormatError(where + ": \"values\" must be an array");
        if (v.size() != rows * cols) {
          throw FormatError(where + ": dimension mismatch, " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " needs " + std::to_string(rows * cols) +
                            " values but " + std::to_string(v.size()) + " given");
        }
        std::vector<double> values;
        values.reserve(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
          values.push_back(detail::finite_number(v[i], where + " value " + std::to_string(i)));
        }
        snap.layers.push_back(WeightedBipartiteLayer::dense(rows, cols, std::move(values)));
      } else if (l.contains("entries")) {
        const auto& v = l["entries"];
        if (!v.is_array()) throw FormatError(where + ": \"entries\" must be an array");
        std::vector<SparseEntry> entries;
        entries.reserve(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
          const auto& e = v[i];
          const std::string at = where + " entry " + std::to_string(i);
          if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() ||
              !e[1].is_number_unsigned()) {
            throw FormatError(at + ": expected [row, col, weight]");
          }
          entries.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(),
                             detail::finite_number(e[2], at)});
        }
        snap.layers.push_back(WeightedBipartiteLayer::sparse(rows, cols, std::move(entries)));
      } else {
        throw FormatError(where + ": needs \"values\" or \"entries\"");
      }
    } catch (const InvalidArgument& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  if (j.value("strict", false) && !snap.is_chained()) {
    throw FormatError(origin + ": strict snapshot whose layer dimensions do not chain");
  }
  return snap;
}

inline NetworkSnapshot load_snapshot(const std::filesystem::path& path) {
  return snapshot_from_text(read_file(path), path.string());
}

inline void save_snapshot(const NetworkSnapshot& snap, const std::filesystem::path& path,
                          bool strict = false) {
  write_file_atomic(path, dump_json(snapshot_to_json(snap, strict), -1) + "\n");
}

// ---------------------------------------------------------------------------
// Trace files: header "step,metric_name,value", one sample per row.

namespace detail {

inline char detect_delimiter(std::string_view header) {
  for (char c : {',', '\t', ';'}) {
    if (header.find(c) != std::string_view::npos) return c;
  }
  throw FormatError("trace header has no recognised delimiter");
}

inline std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, delim);) {
    while (!item.empty() && (item.back() == '\r' || item.back() == ' ')) item.pop_back();
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    out.push_back(item);
  }
  return out;
}

inline double parse_value(const std::string& s, const std::string& where) {
  if (s == "nan" || s == "NaN") return std::nan("");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw FormatError(where + ": '" + s + "' is not a number");
  }
  return v;
}

}  // namespace detail

inline TraceTable traces_from_text(std::string_view text, const std::string& origin = "trace") {
  std::stringstream ss{std::string(text)};
  std::string line;
  if (!std::getline(ss, line)) throw FormatError(origin + ": empty trace file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const char delim = detail::detect_delimiter(line);
  const auto header = detail::split(line, delim);
  if (header != std::vector<std::string>{"step", "metric_name", "value"}) {
    throw FormatError(origin + ":1: header must be step" + std::string(1, delim) + "metric_name" +
                      std::string(1, delim) + "value");
  }
  TraceTable table;
  std::size_t line_no = 1;
  while (std::getline(ss, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto cells = detail::split(line, delim);
    if (cells.size() != 3) throw FormatError(where + ": expected 3 fields");
    char* end = nullptr;
    const long long step = std::strtoll(cells[0].c_str(), &end, 10);
    if (cells[0].empty() || end != cells[0].c_str() + cells[0].size()) {
      throw FormatError(where + ": step '" + cells[0] + "' is not an integer");
    }
    if (!is_known_metric(cells[1])) throw FormatError(where + ": unknown metric '" + cells[1] + "'");
    const double value = detail::parse_value(cells[2], where);
    if (const auto* prior = table.find(cells[1]); prior != nullptr && !prior->empty() &&
                                                  prior->back().step > step) {
      throw FormatError(where + ": steps of '" + cells[1] + "' decrease");
    }
    table.add(cells[1], step, value);
  }
  return table;
}

inline TraceTable load_traces(const std::filesystem::path& path) {
  return traces_from_text(read_file(path), path.string());
}

inline std::string traces_to_text(const TraceTable& table) {
  std::string out = "step,metric_name,value\n";
  for (const auto& [name, samples] : table.series()) {
    for (const auto& s : samples) {
      out += std::to_string(s.step) + "," + name + "," + format_double(s.value) + "\n";
    }
  }
  return out;
}

inline void save_traces(const TraceTable& table, const std::filesystem::path& path) {
  write_file_atomic(path, traces_to_text(table));
}

// ---------------------------------------------------------------------------
// Delimiter-separated matrices (comma, semicolon, tab or spaces), one row
// per line. Lines starting with '#' are ignored.

struct TextMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

inline TextMatrix matrix_from_text(std::string_view text, const std::string& origin = "matrix") {
  TextMatrix m;
  std::stringstream ss{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    }
    const auto first = line.find_first_not_of(' ');
    if (first == std::string::npos || line[first] == '#') continue;
    std::stringstream row(line);
    std::size_t cols = 0;
    for (std::string cell; row >> cell;) {
      const double v = detail::parse_value(cell, origin + ":" + std::to_string(line_no));
      if (!std::isfinite(v)) throw FormatError(origin + ":" + std::to_string(line_no) + ": value is not finite");
      m.values.push_back(v);
      ++cols;
    }
    if (m.rows == 0) {
      m.cols = cols;
    } else if (cols != m.cols) {
      throw FormatError(origin + ":" + std::to_string(line_no) + ": row has " + std::to_string(cols) +
                        " values, expected " + std::to_string(m.cols));
    }
    ++m.rows;
  }
  if (m.rows == 0) throw FormatError(origin + ": no matrix rows");
  return m;
}

inline TextMatrix load_matrix(const std::filesystem::path& path) {
  return matrix_from_text(read_file(path), path.string());
}

/// Reads a dense layer (rows = output units) from a delimited matrix file.
inline WeightedBipartiteLayer load_dense_layer(const std::filesystem::path& path) {
  auto m = load_matrix(path);
  return WeightedBipartiteLayer::dense(m.rows, m.cols, std::move(m.values));
}

/// Reads one convolution filter from a delimited matrix file.
inline ConvFilter load_filter(const std::filesystem::path& path) {
  auto m = load_matrix(path);
  return ConvFilter(m.rows, m.cols, std::move(m.values));
}

}  // namespace npers::io
