#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pilotgen::text {

/// Unit-cost insert/delete/substitute distance over bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

std::vector<std::string_view> split_lines(std::string_view s);
std::string_view trim_right(std::string_view s);
std::string_view trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace pilotgen::text
