// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace clmn::io {

/// Writes to "<path>.tmp" then renames over `path`, so readers never see a
/// partially written file. Throws IoError on failure.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace clmn::io
