#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nggmix/observation.hpp"

namespace nggmix {

/// Parses a dataset. A header row is optional; with a header, the columns
/// named `left` and `right` are used (other columns are ignored). Without
/// one, a single column holds exact values and two columns hold left,right.
/// Empty or NA cells are missing bounds. Errors carry 1-based line numbers.
std::vector<Observation> parse_dataset_text(std::string_view text);
std::vector<Observation> parse_dataset(const std::string& path);

/// `left,right` CSV that parse_dataset_text reads back unchanged.
std::string serialize_dataset(std::span<const Observation> data);

/// Shortest decimal text that reads back to the same double; NA for NaN.
std::string format_double(double x);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace nggmix
