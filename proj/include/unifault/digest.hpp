// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace unifault {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const char> bytes);
std::string sha256_hex(std::string_view text);
std::string digest_file(const std::filesystem::path& path);

/// Digest over every regular file below dir: sorted relative paths with
/// their contents. Equal trees give equal digests.
std::string digest_directory(const std::filesystem::path& dir);

}  // namespace unifault
