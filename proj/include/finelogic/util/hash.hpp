#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace finelogic::util {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace finelogic::util
