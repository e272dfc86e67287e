#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace iotsentry {

/// Splits one CSV record. Supports double-quoted fields with "" escapes;
/// strips a trailing '\r'.
std::vector<std::string> split_csv_line(std::string_view line);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Parses a full cell as a double; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& out);

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace iotsentry
