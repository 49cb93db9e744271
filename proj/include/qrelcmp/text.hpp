#pragma once

// Locale-independent number formatting, field splitting, small CSV helpers
// and atomic file output.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qrelcmp::text {

/// Splits on runs of spaces/tabs; a trailing '\r' is dropped.
std::vector<std::string_view> split_fields(std::string_view line);

std::optional<long long> parse_int(std::string_view s);
/// Finite doubles only.
std::optional<double> parse_double(std::string_view s);

/// Fixed notation with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);
/// Shortest representation that parses back to the same double.
std::string format_shortest(double value);

/// Splits one CSV record; supports double-quoted fields.
std::vector<std::string> split_csv(std::string_view line);
/// Quotes a field when it contains a comma, a quote or a newline.
std::string csv_field(std::string_view value);

/// Writes `contents` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
/// Throws InputError naming the path if the file cannot be read.
std::string read_file(const std::filesystem::path& path);

}  // namespace qrelcmp::text
