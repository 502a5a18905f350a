#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace qnls {

std::string sha1_hex(std::string_view bytes);
// Git blob id: sha1("blob <size>\0" + bytes).
std::string git_blob_hash(std::string_view bytes);
std::string git_blob_hash_file(const std::filesystem::path& path);

}  // namespace qnls
