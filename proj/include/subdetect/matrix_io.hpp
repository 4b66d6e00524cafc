#pragma once
// CSV exchange formats.
//
// Matrix: one row per line, comma separated, no header, '.' decimal point.
// Values are written in shortest round-trip form so a written file reads
// back to bit-identical doubles.
//
// Support: two lines, 1-based row indices then 1-based column indices.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "subdetect/core_model.hpp"

namespace subdetect {

[[nodiscard]] ObservationMatrix read_matrix_csv(std::istream& in);
[[nodiscard]] ObservationMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& out, const ObservationMatrix& matrix);
void write_matrix_csv(const std::filesystem::path& path, const ObservationMatrix& matrix);

[[nodiscard]] SubmatrixSupport read_support(std::istream& in);
void write_support(std::ostream& out, const SubmatrixSupport& support);

/// Shortest decimal text that parses back to exactly `value`.
[[nodiscard]] std::string format_double(double value);

/// Locale-independent parse of the whole string; throws ParseError.
[[nodiscard]] double parse_double(const std::string& text);

}  // namespace subdetect
