#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace selgeo::csv {

/// Shortest round-trip decimal representation (std::to_chars), so written
/// files are lossless and byte-stable across runs.
std::string fmt(double v);
std::string fmt(std::optional<double> v);  // empty string when absent

std::string join_row(const std::vector<std::string>& fields);

/// Write via temp file + rename so readers never observe partial output.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace selgeo::csv
