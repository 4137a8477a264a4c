#pragma once

#include <string>
#include <string_view>

namespace communitypoll {

// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

// First 16 hex chars of sha256_hex, used for compact content addressing.
std::string short_hash(std::string_view data);

}  // namespace communitypoll
