#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace asraudit {

struct CsvRow {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Blank lines are skipped. Throws InputError on an unterminated
// quote.
std::vector<CsvRow> parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);

// "%.9g", with -0 printed as 0 so output bytes do not depend on sign noise.
std::string format_double(double v);

// Fixed decimals for reports and figures.
std::string format_fixed(double v, int decimals);

// Full-string numeric parse; false on trailing garbage or empty input.
bool parse_double(std::string_view s, double& out);

std::string trim(std::string_view s);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace asraudit
