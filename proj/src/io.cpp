#include "pncp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pncp {

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<double> read_column_csv(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header row");
  strip_cr(line);
  if (line != header) {
    throw std::runtime_error("csv: expected header '" + std::string(header) + "', got '" + line + "'");
  }
  std::vector<double> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (line.empty()) continue;
    double v = 0.0;
    const char* first = line.data();
    const char* last = line.data() + line.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
      throw std::runtime_error("csv: cannot parse row " + std::to_string(row) + ": '" + line + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> read_column_csv(const std::filesystem::path& path, std::string_view header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_column_csv(in, header);
}

void write_column_csv(std::ostream& out, std::span<const double> values, std::string_view header) {
  out << header << '\n';
  for (double v : values) out << format_double(v) << '\n';
}

void write_column_csv(const std::filesystem::path& path, std::span<const double> values,
                      std::string_view header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_column_csv(out, values, header);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace pncp
