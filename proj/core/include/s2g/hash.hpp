#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace s2g {

/// 64-bit FNV-1a. Used for config hashes, checkpoint hashes and manifest
/// content hashes; not a cryptographic digest.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t fnv1a64(std::span<const unsigned char> bytes) noexcept;

/// Lower-case, zero-padded 16-digit hex.
std::string hex64(std::uint64_t value);

/// Hash of a file's bytes. Throws IoError if unreadable.
std::uint64_t hash_file(const std::string& path);

}  // namespace s2g
