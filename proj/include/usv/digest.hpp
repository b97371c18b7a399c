#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace usv {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(const std::string& text);
std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace usv
