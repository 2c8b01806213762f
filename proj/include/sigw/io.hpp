#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sigw/analysis.hpp"
#include "sigw/measures.hpp"
#include "sigw/slicing.hpp"
#include "sigw/stiefel.hpp"

namespace sigw {

/// Rows of numbers read from a comma-separated file, plus the header row if
/// the first line was not numeric and an optional label column.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::string> labels;
  Matrix values;
};

struct CsvOptions {
  /// Zero-based column holding a non-numeric label, removed from `values`.
  std::optional<std::size_t> label_column;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

inline std::optional<double> parse_number(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

inline std::string location(const std::string& source, std::size_t line, std::size_t column) {
  return source + ":" + std::to_string(line) + ": column " + std::to_string(column);
}

}  // namespace detail

/// Parses CSV text. Line and column numbers in errors are one-based.
inline CsvTable parse_csv(std::istream& in, const std::string& source = "<input>", const CsvOptions& options = {}) {
  CsvTable table;
  std::vector<double> data;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    if (first) {
      first = false;
      width = fields.size();
      require(!options.label_column || *options.label_column < width, ErrorKind::ParseError,
              source + ": label column " + std::to_string(*options.label_column + 1) + " is past the last column");
      bool numeric = true;
      for (std::size_t c = 0; c < fields.size(); ++c)
        if (c != options.label_column && !detail::parse_number(fields[c])) numeric = false;
      if (!numeric) {
        for (auto f : fields) table.header.emplace_back(f);
        continue;
      }
    }
    require(fields.size() == width, ErrorKind::RaggedRows,
            source + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) + " fields, found " +
                std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == options.label_column) {
        table.labels.emplace_back(fields[c]);
        continue;
      }
      const auto v = detail::parse_number(fields[c]);
      require(v.has_value(), ErrorKind::ParseError,
              detail::location(source, line_no, c + 1) + ": not a finite number: '" + std::string(fields[c]) + "'");
      data.push_back(*v);
    }
    ++rows;
  }
  require(rows > 0, ErrorKind::EmptyFile, source + ": no data rows");
  const std::size_t cols = width - (options.label_column ? 1 : 0);
  require(cols > 0, ErrorKind::ParseError, source + ": no numeric columns");
  table.values = Matrix(rows, cols, std::move(data));
  return table;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "cannot open '" + path + "' for writing");
  return out;
}

inline CsvTable read_csv(const std::string& path, const CsvOptions& options = {}) {
  auto in = open_input(path);
  return parse_csv(in, path, options);
}

/// Rows become points with weight 1/n.
inline EmpiricalMeasure ingest_csv(const std::string& path, const CsvOptions& options = {}) {
  return EmpiricalMeasure(read_csv(path, options).values);
}

/// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header = {}) {
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  if (!header.empty()) out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_number(m(i, j));
    out << '\n';
  }
}

/// Label header row followed by the n x n table.
inline void write_distance_csv(std::ostream& out, const DistanceMatrix& d) {
  write_matrix_csv(out, d.values(), d.labels());
}

inline DistanceMatrix parse_distance_csv(std::istream& in, const std::string& source = "<input>") {
  auto table = parse_csv(in, source);
  if (table.header.empty())
    for (std::size_t i = 0; i < table.values.cols(); ++i) table.header.push_back(std::to_string(i));
  require(table.values.is_square() && table.header.size() == table.values.rows(), ErrorKind::DimensionMismatch,
          source + ": distance table is " + table.values.shape() + " with " + std::to_string(table.header.size()) +
              " labels");
  return DistanceMatrix(std::move(table.header), std::move(table.values));
}

inline DistanceMatrix read_distance_csv(const std::string& path) {
  auto in = open_input(path);
  return parse_distance_csv(in, path);
}

/// One direction per row.
inline void write_directions_csv(std::ostream& out, const DirectionSet& dirs) {
  write_matrix_csv(out, dirs.directions);
}

inline DirectionSet read_directions_csv(const std::string& path, std::uint64_t seed = 0) {
  return make_direction_set(read_csv(path).values, seed);
}

inline void write_trace_csv(std::ostream& out, const OptimizerTrace& trace) {
  out << "iteration,objective,feasibility_residual,subgradient_norm\n";
  for (const auto& r : trace.iterates)
    out << r.iteration << ',' << format_number(r.objective) << ',' << format_number(r.feasibility_residual) << ','
        << format_number(r.subgradient_norm) << '\n';
}

/// One integer label per line (a header line is allowed).
inline Partition read_partition(const std::string& path) {
  const auto table = read_csv(path);
  require(table.values.cols() == 1, ErrorKind::ParseError, path + ": expected one label per line");
  Partition p;
  for (std::size_t i = 0; i < table.values.rows(); ++i) {
    const double v = table.values(i, 0);
    require(v == std::floor(v), ErrorKind::ParseError,
            path + ": row " + std::to_string(i + 1) + ": label is not an integer");
    p.push_back(static_cast<int>(v));
  }
  return p;
}

}  // namespace sigw
