#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "usv/scalogram.hpp"

namespace usv {

// Minimal deterministic PNG encoder (8-bit RGB, stored deflate blocks).
// rgb is row-major, top row first, 3 bytes per pixel.
std::vector<std::uint8_t> encode_png_rgb(int width, int height,
                                         std::span<const std::uint8_t> rgb);
void write_png_rgb(const std::string& path, int width, int height,
                   std::span<const std::uint8_t> rgb);

// Renders one scalogram channel as a 192x150 grayscale-mapped RGB image with
// row 0 (lowest frequency) at the bottom.
void render_channel_png(const Scalogram& s, int channel, const std::string& path);

}  // namespace usv
