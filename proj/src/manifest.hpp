#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stablesep::cli::detail {

/// Hex SHA-1 of "blob <size>\0<content>", the object id git assigns to a file.
std::string git_blob_hash(std::string_view content);

/// Writes `content` to dir/name and returns the path.
std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                 const std::string& content);

struct ManifestEntry {
  std::string file;
  std::string hash;
};

std::string render_manifest(const std::string& config_echo, const std::string& status,
                            const std::vector<ManifestEntry>& files,
                            const std::vector<std::string>& completed_cells);

}  // namespace stablesep::cli::detail
