#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace scrbo::csv {

/// Shortest decimal form that parses back to the same double, independent of
/// the C locale.
std::string format(double value);
std::string format(long long value);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ErrorCode::parse when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::vector<double> numeric_column(std::string_view name) const;
};

/// Comma-separated, one header row, no quoting.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

void write(const std::filesystem::path& path, const Table& table);
std::string to_string(const Table& table);

}  // namespace scrbo::csv
