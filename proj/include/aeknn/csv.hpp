#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aeknn::csv {

/// Split one CSV record on commas. Double-quoted fields may contain commas;
/// a doubled quote inside a quoted field is a literal quote. Surrounding
/// whitespace of unquoted fields is trimmed.
std::vector<std::string> split_line(std::string_view line);

/// Quote a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Parse a finite double occupying the whole field; returns false otherwise.
bool parse_double(std::string_view field, double& out);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace aeknn::csv
