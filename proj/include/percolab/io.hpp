#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace percolab::io {

// Shortest decimal text that parses back to the same double; "nan"/"inf"
// for non-finite values.
std::string fmt_real(double x);

std::vector<std::string> split_csv_line(std::string_view line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a column; throws LookupError when missing.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

double parse_real(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace percolab::io
