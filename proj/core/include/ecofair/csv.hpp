#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ecofair {

/// %.6g, with "-0" normalised to "0".
std::string format_number(double v);

/// Minimal reader for the comma-separated files this library writes
/// (no quoting). Throws Error on I/O failure or ragged rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace ecofair
