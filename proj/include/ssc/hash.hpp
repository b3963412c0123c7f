#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ssc {

/// SHA-1 of a byte buffer, lowercase hex.
std::string sha1_hex(const void* data, std::size_t len);

/// Git-style content hash of a file: sha1("blob <size>\0" + bytes).
std::string git_blob_hash(const std::string& path);

}  // namespace ssc
