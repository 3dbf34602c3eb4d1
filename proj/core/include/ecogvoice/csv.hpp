#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ecogvoice::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws DataError naming the column if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

// RFC-4180-ish: comma separated, optional double quotes, CRLF tolerated.
std::vector<std::string> split_line(std::string_view line);
Table read(const std::filesystem::path& path);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

// Shortest round-trip text for a double; empty string for NaN.
std::string format_number(double v);

}  // namespace ecogvoice::csv
