#pragma once

#include <filesystem>
#include <string>

namespace surrobench {

/// Writes through a sibling temp file and renames it into place, so readers
/// never observe a partial file. Parent directories are created.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

} // namespace surrobench
