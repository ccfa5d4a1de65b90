#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mauc {

std::vector<std::uint8_t> read_file(const std::string& path);
std::string read_text(const std::string& path);

// Writes to a sibling temporary file and renames it over `path`, so a failed
// write never leaves a partial file behind.
void write_file_atomic(const std::string& path, std::string_view data);
void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& data);

} // namespace mauc
