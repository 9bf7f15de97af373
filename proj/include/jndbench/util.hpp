#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace jndbench {

// Shortest decimal string that parses back to the same double ("0.8" stays
// "0.8", not "0.80000000000000004"). Infinities render as "inf"/"-inf".
std::string format_double(double value);

// Write-to-temp-then-rename so readers never observe a half-written file.
// Creates parent directories as needed.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

// Strict comma splitter for the fixed schemas used here; no quoting rules,
// trailing '\r' stripped.
std::vector<std::string> split_csv_line(const std::string& line);

// Parses a double, throwing ParseError naming the column on garbage or
// trailing junk. Accepts "inf"/"+inf"/"-inf"/"nan" (C locale semantics).
double parse_double(const std::string& text, long row, const std::string& column);

long parse_long(const std::string& text, long row, const std::string& column);

}  // namespace jndbench
