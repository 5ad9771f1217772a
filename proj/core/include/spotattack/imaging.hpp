#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spotattack/errors.hpp"

namespace spotattack {

/// Image geometry. `height` is the row axis (a), `width` the column axis (b).
struct Dims {
  int height = 0;
  int width = 0;

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Standard license-plate character geometry: 60 rows x 35 columns.
inline constexpr Dims kCharDims{60, 35};

/// Spot anchor. `a` is a row, `b` a column.
struct Position {
  int a = 0;
  int b = 0;

  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position&, const Position&) = default;
};

/// Inclusive bounds on spot positions.
struct Region {
  int a_min = 0;
  int a_max = 0;
  int b_min = 0;
  int b_max = 0;

  int rows() const { return a_max - a_min + 1; }
  int cols() const { return b_max - b_min + 1; }
  long cardinality() const { return static_cast<long>(rows()) * cols(); }
  bool contains(Position p) const {
    return p.a >= a_min && p.a <= a_max && p.b >= b_min && p.b <= b_max;
  }

  friend bool operator==(const Region&, const Region&) = default;
};

/// H x W x 3 image with real-valued intensities in [0, 255], row-major, interleaved RGB.
class CharImage {
 public:
  static constexpr int kChannels = 3;

  CharImage() = default;
  /// Uniform image; throws InvalidArgument for non-positive dims or out-of-range fill.
  explicit CharImage(Dims dims, double fill = 0.0);
  /// Takes ownership of `data` (size H*W*3); every value must lie in [0, 255].
  CharImage(Dims dims, std::vector<double> data);

  Dims dims() const { return dims_; }
  int height() const { return dims_.height; }
  int width() const { return dims_.width; }

  double at(int row, int col, int ch) const { return data_[index(row, col, ch)]; }
  /// Writes one intensity; clamps into [0, 255].
  void set(int row, int col, int ch, double value);
  void set_rgb(int row, int col, double value);

  std::span<const double> data() const { return data_; }

  friend bool operator==(const CharImage&, const CharImage&) = default;

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * dims_.width + col) * kChannels + ch;
  }

  Dims dims_{};
  std::vector<double> data_;
};

/// Binary H x W matrix; 1 marks a spot pixel.
class Mask {
 public:
  Mask() = default;
  explicit Mask(Dims dims);
  Mask(Dims dims, std::vector<std::uint8_t> bits);

  Dims dims() const { return dims_; }
  bool at(int row, int col) const {
    return bits_[static_cast<std::size_t>(row) * dims_.width + col] != 0;
  }
  void set(int row, int col, bool on) {
    bits_[static_cast<std::size_t>(row) * dims_.width + col] = on ? 1 : 0;
  }
  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  Dims dims_{};
  std::vector<std::uint8_t> bits_;
};

namespace shape {

/// r x r square, anchored at its top-left pixel.
struct Rect {
  int side = 1;
};
/// Disc of radius r, anchored at its center.
struct Circle {
  int radius = 1;
};
/// Axis-aligned ellipse: `row_radius` along the height axis, `col_radius` along the width axis.
struct Ellipse {
  int row_radius = 1;
  int col_radius = 1;
};
/// Precomputed full-image mask; the only feasible position is (0, 0).
struct Custom {
  Mask mask;
};

}  // namespace shape

using SpotShape = std::variant<shape::Rect, shape::Circle, shape::Ellipse, shape::Custom>;

enum class SpotMode {
  /// X * (J - M) + M * clamp(delta, 0, 255)
  Replace,
  /// clamp(X + M * delta, 0, 255)
  AddClamp,
};

struct SpotSpec {
  SpotShape shape = shape::Rect{5};
  Position position{};
  int delta = 200;
  SpotMode mode = SpotMode::Replace;
};

struct PixelCount {
  long count = 0;
  double fraction = 0.0;
};

/// Inclusive range of anchors at which `shape` lies entirely inside `dims`.
/// Throws ShapeTooLarge when no such anchor exists.
Region feasible_region(const SpotShape& shape, Dims dims);

/// Stamps `shape` at `position`. Circles and ellipses include pixel (i, j) when
/// ((i-a)/(ra+0.5))^2 + ((j-b)/(rb+0.5))^2 <= 1.
/// Throws PositionOutOfRange outside feasible_region.
Mask rasterize_mask(const SpotShape& shape, Position position, Dims dims);

/// Applies a spot of amplitude `delta` (in [-255, 255]) to every masked pixel, identically
/// on all channels. Unmasked pixels are copied bit-for-bit.
CharImage apply_spot(const CharImage& image, const Mask& mask, int delta, SpotMode mode);

/// Rasterizes `spec` and applies it.
CharImage apply_spot(const CharImage& image, const SpotSpec& spec);

PixelCount pixel_count(const Mask& mask);

const char* to_string(SpotMode mode);
SpotMode parse_spot_mode(std::string_view text);

/// Short human-readable description, e.g. "rect5", "circle3", "ellipse3x2", "custom".
std::string describe(const SpotShape& shape);

}  // namespace spotattack
