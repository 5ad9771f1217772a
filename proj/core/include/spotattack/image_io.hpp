#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "spotattack/imaging.hpp"

namespace spotattack {

/// Reads an 8-bit PNG. Grayscale and alpha inputs are expanded/stripped to RGB.
CharImage read_png(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG; intensities are rounded to the nearest integer.
void write_png(const CharImage& image, const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG from row-major `pixels` (size dims.height * dims.width).
void write_gray_png(std::span<const std::uint8_t> pixels, Dims dims,
                    const std::filesystem::path& path);

/// 0 -> black, 1 -> white grayscale PNG.
void write_mask_png(const Mask& mask, const std::filesystem::path& path);

/// Text format: first line "H W", then H lines of W '0'/'1' characters.
void write_mask_text(const Mask& mask, const std::filesystem::path& path);
std::string format_mask_text(const Mask& mask);
Mask read_mask_text(const std::filesystem::path& path);
Mask parse_mask_text(std::string_view text);

/// Quantizes an intensity to the 8-bit value written to disk.
std::uint8_t quantize(double intensity);

/// Image after a write/read cycle through 8-bit storage.
CharImage quantized(const CharImage& image);

}  // namespace spotattack
