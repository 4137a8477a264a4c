#pragma once

#include <filesystem>
#include <string>

namespace communitypoll {

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temp file then renames into place, so readers never
// observe a partially written artifact.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace communitypoll
