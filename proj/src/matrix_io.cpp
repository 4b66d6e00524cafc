#include "subdetect/matrix_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

namespace subdetect {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_field(std::string_view field, double& value) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end && !field.empty();
}

std::vector<std::size_t> parse_index_line(const std::string& line, const char* what) {
  std::vector<std::size_t> out;
  for (auto field : split_commas(line)) {
    std::size_t v = 0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc() || ptr != end || field.empty()) {
      throw DetectionError(ErrorKind::ParseError,
                           std::string("bad ") + what + " index '" + std::string(field) + "'");
    }
    if (v == 0) {
      throw DetectionError(ErrorKind::IndexOutOfBounds,
                           std::string(what) + " indices are 1-based; got 0");
    }
    out.push_back(v - 1);
  }
  return out;
}

}  // namespace

ObservationMatrix read_matrix_csv(std::istream& in) {
  std::vector<double> entries;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (rows == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      std::ostringstream msg;
      msg << "row " << rows + 1 << " has " << fields.size() << " fields, expected " << cols;
      throw DetectionError(ErrorKind::DimensionMismatch, msg.str());
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v = 0.0;
      if (!parse_field(fields[j], v)) {
        std::ostringstream msg;
        msg << "cannot parse '" << fields[j] << "' at row " << rows + 1 << ", column " << j + 1;
        throw DetectionError(ErrorKind::ParseError, msg.str());
      }
      entries.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DetectionError(ErrorKind::ParseError, "matrix file is empty");
  return ObservationMatrix(rows, cols, std::move(entries));
}

ObservationMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DetectionError(ErrorKind::ParseError, "cannot open " + path.string());
  return read_matrix_csv(in);
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  if (!parse_field(trim(text), v)) {
    throw DetectionError(ErrorKind::ParseError, "not a number: '" + text + "'");
  }
  return v;
}

void write_matrix_csv(std::ostream& out, const ObservationMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const auto row = matrix.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const ObservationMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw DetectionError(ErrorKind::ParseError, "cannot write " + path.string());
  write_matrix_csv(out, matrix);
}

SubmatrixSupport read_support(std::istream& in) {
  std::string row_line;
  std::string col_line;
  if (!std::getline(in, row_line) || !std::getline(in, col_line)) {
    throw DetectionError(ErrorKind::ParseError, "support file needs two lines");
  }
  return SubmatrixSupport(parse_index_line(row_line, "row"), parse_index_line(col_line, "column"));
}

void write_support(std::ostream& out, const SubmatrixSupport& support) {
  auto emit = [&out](const std::vector<std::size_t>& idx) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k) out << ',';
      out << idx[k] + 1;
    }
    out << '\n';
  };
  emit(support.rows());
  emit(support.cols());
}

}  // namespace subdetect
