#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace coa::csv {

using Row = std::vector<std::string>;

/// Splits one CSV line. Double-quoted fields may contain commas and doubled
/// quotes.
Row split_line(std::string_view line);

/// Reads a whole file. Blank lines and lines starting with '#' are skipped.
std::vector<Row> read_file(const std::filesystem::path& path);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const Row& row);

double to_double(const std::string& field, std::string_view context);
int to_int(const std::string& field, std::string_view context);

/// Shortest decimal text that round-trips the double.
std::string format_double(double value);

}  // namespace coa::csv
