#pragma once

#include <string>
#include <string_view>

namespace psst {

/// SHA-256 of the given bytes as a lowercase hex string.
std::string sha256_hex(std::string_view bytes);

}  // namespace psst
