#pragma once

#include <string>
#include <string_view>

namespace metamaint {

/// Lowercase hex SHA-1 of `data`.
std::string sha1_hex(std::string_view data);

/// Git object name of `content` stored as a blob: SHA-1 of
/// "blob <len>\0<content>".
std::string git_blob_hash(std::string_view content);

} // namespace metamaint
