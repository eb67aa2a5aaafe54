#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace abcd {

/// Writes `content` to a sibling temp file and renames it over `path`, so a
/// reader never observes a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Lines of a text file with trailing '\r' removed.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// UTC timestamp, ISO-8601 with seconds precision.
std::string utc_timestamp();

}  // namespace abcd
