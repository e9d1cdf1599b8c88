#pragma once

#include <span>
#include <string>
#include <string_view>

namespace dvl {

// SHA-256 as lowercase hex (OpenSSL-backed).
std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(std::span<const unsigned char> bytes);

std::string base64_encode(std::span<const unsigned char> bytes);
std::string base64_encode(std::string_view bytes);

}  // namespace dvl
