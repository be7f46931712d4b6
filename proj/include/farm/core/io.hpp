#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string_view>
#include <string>
#include <vector>

#include "json.hpp"

namespace farm::io {

/// Little-endian float32 blob, C-order.
void write_f32(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_f32(const std::filesystem::path& path, std::size_t expected_count);
/// Little-endian float32 encoding as bytes (for hashing).
std::vector<std::byte> encode_f32(const std::vector<double>& values);

void write_u8(const std::filesystem::path& path, const std::vector<std::uint8_t>& values);
std::vector<std::uint8_t> read_u8(const std::filesystem::path& path, std::size_t expected_count);

void write_bytes(const std::filesystem::path& path, const std::vector<std::byte>& bytes);
std::vector<std::byte> read_bytes(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Throws ConfigError naming the first key of obj not in allowed.
void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& context);

}  // namespace farm::io
