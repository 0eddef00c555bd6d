#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pncp {

// Shortest round-trip decimal form ('.' separator, locale independent).
// NaN is written as an empty field.
std::string format_double(double v);

// Single-column CSV with a header row. Reading accepts CRLF line endings,
// a trailing newline and blank trailing lines.
std::vector<double> read_column_csv(std::istream& in, std::string_view header = "y");
std::vector<double> read_column_csv(const std::filesystem::path& path, std::string_view header = "y");
void write_column_csv(std::ostream& out, std::span<const double> values, std::string_view header = "y");
void write_column_csv(const std::filesystem::path& path, std::span<const double> values,
                      std::string_view header = "y");

}  // namespace pncp
