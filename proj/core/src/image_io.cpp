#include "spotattack/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace spotattack {

namespace {

void write_png_buffer(const std::filesystem::path& path, Dims dims, png_uint_32 format,
                      const std::uint8_t* buffer, int row_stride) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(dims.width);
  img.height = static_cast<png_uint_32>(dims.height);
  img.format = format;
  if (!png_image_write_to_file(&img, path.c_str(), 0, buffer, row_stride, nullptr)) {
    std::string msg = "cannot write PNG " + path.string() + ": " + img.message;
    png_image_free(&img);
    throw IoError(msg);
  }
}

}  // namespace

std::uint8_t quantize(double intensity) {
  const double v = std::clamp(std::nearbyint(intensity), 0.0, 255.0);
  return static_cast<std::uint8_t>(v);
}

CharImage quantized(const CharImage& image) {
  std::vector<double> data(image.data().begin(), image.data().end());
  for (double& v : data) v = quantize(v);
  return CharImage(image.dims(), std::move(data));
}

CharImage read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = "cannot decode PNG " + path.string() + ": " + img.message;
    png_image_free(&img);
    throw IoError(msg);
  }
  const Dims dims{static_cast<int>(img.height), static_cast<int>(img.width)};
  std::vector<double> data(buffer.begin(), buffer.end());
  return CharImage(dims, std::move(data));
}

void write_png(const CharImage& image, const std::filesystem::path& path) {
  std::vector<std::uint8_t> buffer;
  buffer.reserve(image.data().size());
  for (double v : image.data()) buffer.push_back(quantize(v));
  write_png_buffer(path, image.dims(), PNG_FORMAT_RGB, buffer.data(),
                   image.width() * CharImage::kChannels);
}

void write_gray_png(std::span<const std::uint8_t> pixels, Dims dims,
                    const std::filesystem::path& path) {
  if (pixels.size() != static_cast<std::size_t>(dims.height) * dims.width) {
    throw DimensionMismatch("gray buffer size does not match dims");
  }
  write_png_buffer(path, dims, PNG_FORMAT_GRAY, pixels.data(), dims.width);
}

void write_mask_png(const Mask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> pixels;
  pixels.reserve(mask.bits().size());
  for (auto b : mask.bits()) pixels.push_back(b ? 255 : 0);
  write_gray_png(pixels, mask.dims(), path);
}

std::string format_mask_text(const Mask& mask) {
  std::string out = std::to_string(mask.dims().height) + " " + std::to_string(mask.dims().width) + "\n";
  for (int r = 0; r < mask.dims().height; ++r) {
    for (int c = 0; c < mask.dims().width; ++c) out.push_back(mask.at(r, c) ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

void write_mask_text(const Mask& mask, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << format_mask_text(mask);
  if (!f) throw IoError("failed writing " + path.string());
}

Mask parse_mask_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  int h = 0;
  int w = 0;
  if (!(in >> h >> w) || h < 1 || w < 1) throw ParseError("mask text: bad header");
  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(h) * w);
  std::string line;
  std::getline(in, line);
  for (int r = 0; r < h; ++r) {
    if (!std::getline(in, line)) throw ParseError("mask text: missing row " + std::to_string(r));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != w) {
      throw ParseError("mask text: row " + std::to_string(r) + " has wrong width");
    }
    for (char ch : line) {
      if (ch != '0' && ch != '1') throw ParseError("mask text: non-binary character");
      bits.push_back(ch == '1' ? 1 : 0);
    }
  }
  return Mask({h, w}, std::move(bits));
}

Mask read_mask_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_mask_text(ss.str());
}

}  // namespace spotattack
