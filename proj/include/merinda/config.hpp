#pragma once

#include <map>
#include <string>

namespace merinda {

/// Flat `key = value` text: one pair per line, '#' comments, blank lines
/// ignored.
std::map<std::string, std::string> parse_flat_config(const std::string& text);
std::map<std::string, std::string> load_flat_config(const std::string& path);

}  // namespace merinda
