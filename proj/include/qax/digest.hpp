#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace qax {

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

std::string base64_encode(std::string_view bytes);
std::optional<std::string> base64_decode(std::string_view text);

/// `n` random bytes from the OS CSPRNG, hex encoded.
std::string random_hex(std::size_t n);

} // namespace qax
