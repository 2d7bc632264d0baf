#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ranagent {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Lowercased maximal runs of ASCII alphanumerics.
std::vector<std::string> tokenize(std::string_view text);

/// Shortest fixed rendering with at most two decimals: 30 -> "30",
/// 18.3333 -> "18.33", 2.5 -> "2.5".
std::string format_number(double value);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace ranagent
