#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aurk::csv {

/// Splits one CSV line on commas. Fields are trimmed of surrounding blanks and a
/// trailing '\r'. Quoting is not supported; none of the toolkit's formats need it.
std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Strict number parsing; throws FormatError naming `what` on failure.
double parse_double(std::string_view field, std::string_view what);
int parse_int(std::string_view field, std::string_view what);

/// Shortest representation that parses back to the identical double.
std::string format_double(double value);

/// Reads a whole text file; throws Error when it cannot be opened.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

/// Splits text into lines, dropping blank lines and `#` comments.
std::vector<std::string_view> content_lines(std::string_view text);

}  // namespace aurk::csv
