#include "spotattack/imaging.hpp"

#include <algorithm>
#include <string>

namespace spotattack {

namespace {

void check_dims(Dims dims) {
  if (dims.height < 1 || dims.width < 1) {
    throw InvalidArgument("image dims must be positive, got " + std::to_string(dims.height) +
                          "x" + std::to_string(dims.width));
  }
}

double clamp_intensity(double v) { return std::clamp(v, 0.0, 255.0); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void stamp_ellipse(Mask& mask, Position center, int row_radius, int col_radius) {
  const double ra = row_radius + 0.5;
  const double rb = col_radius + 0.5;
  for (int di = -row_radius; di <= row_radius; ++di) {
    for (int dj = -col_radius; dj <= col_radius; ++dj) {
      const double u = di / ra;
      const double v = dj / rb;
      if (u * u + v * v <= 1.0) mask.set(center.a + di, center.b + dj, true);
    }
  }
}

}  // namespace

CharImage::CharImage(Dims dims, double fill) : dims_(dims) {
  check_dims(dims);
  if (!(fill >= 0.0 && fill <= 255.0)) throw InvalidArgument("fill intensity outside [0, 255]");
  data_.assign(static_cast<std::size_t>(dims.height) * dims.width * kChannels, fill);
}

CharImage::CharImage(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  check_dims(dims);
  if (data_.size() != static_cast<std::size_t>(dims.height) * dims.width * kChannels) {
    throw DimensionMismatch("image buffer size does not match " + std::to_string(dims.height) +
                            "x" + std::to_string(dims.width) + "x3");
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 255.0)) throw InvalidArgument("intensity outside [0, 255]");
  }
}

void CharImage::set(int row, int col, int ch, double value) {
  data_[index(row, col, ch)] = clamp_intensity(value);
}

void CharImage::set_rgb(int row, int col, double value) {
  const double v = clamp_intensity(value);
  for (int ch = 0; ch < kChannels; ++ch) data_[index(row, col, ch)] = v;
}

Mask::Mask(Dims dims) : dims_(dims) {
  check_dims(dims);
  bits_.assign(static_cast<std::size_t>(dims.height) * dims.width, 0);
}

Mask::Mask(Dims dims, std::vector<std::uint8_t> bits) : dims_(dims), bits_(std::move(bits)) {
  check_dims(dims);
  if (bits_.size() != static_cast<std::size_t>(dims.height) * dims.width) {
    throw DimensionMismatch("mask buffer size does not match dims");
  }
  for (auto& b : bits_) {
    if (b > 1) throw InvalidArgument("mask entries must be 0 or 1");
  }
}

Region feasible_region(const SpotShape& shape, Dims dims) {
  check_dims(dims);
  auto too_large = [&](const std::string& what) {
    return ShapeTooLarge(what + " does not fit in a " + std::to_string(dims.height) + "x" +
                         std::to_string(dims.width) + " image");
  };
  return std::visit(
      Overloaded{
          [&](const shape::Rect& s) {
            if (s.side < 1) throw InvalidArgument("rect side must be >= 1");
            if (s.side > dims.height || s.side > dims.width) throw too_large(describe(shape));
            return Region{0, dims.height - s.side, 0, dims.width - s.side};
          },
          [&](const shape::Circle& s) {
            if (s.radius < 0) throw InvalidArgument("circle radius must be >= 0");
            if (2 * s.radius + 1 > dims.height || 2 * s.radius + 1 > dims.width) {
              throw too_large(describe(shape));
            }
            return Region{s.radius, dims.height - s.radius - 1, s.radius,
                          dims.width - s.radius - 1};
          },
          [&](const shape::Ellipse& s) {
            if (s.row_radius < 0 || s.col_radius < 0) {
              throw InvalidArgument("ellipse radii must be >= 0");
            }
            if (2 * s.row_radius + 1 > dims.height || 2 * s.col_radius + 1 > dims.width) {
              throw too_large(describe(shape));
            }
            return Region{s.row_radius, dims.height - s.row_radius - 1, s.col_radius,
                          dims.width - s.col_radius - 1};
          },
          [&](const shape::Custom& s) {
            if (s.mask.dims() != dims) throw DimensionMismatch("custom mask dims differ from image");
            return Region{0, 0, 0, 0};
          },
      },
      shape);
}

Mask rasterize_mask(const SpotShape& shape, Position position, Dims dims) {
  const Region region = feasible_region(shape, dims);
  if (!region.contains(position)) {
    throw PositionOutOfRange("position (" + std::to_string(position.a) + ", " +
                             std::to_string(position.b) + ") outside feasible region for " +
                             describe(shape));
  }
  if (const auto* custom = std::get_if<shape::Custom>(&shape)) return custom->mask;

  Mask mask(dims);
  std::visit(Overloaded{
                 [&](const shape::Rect& s) {
                   for (int i = 0; i < s.side; ++i) {
                     for (int j = 0; j < s.side; ++j) mask.set(position.a + i, position.b + j, true);
                   }
                 },
                 [&](const shape::Circle& s) { stamp_ellipse(mask, position, s.radius, s.radius); },
                 [&](const shape::Ellipse& s) {
                   stamp_ellipse(mask, position, s.row_radius, s.col_radius);
                 },
                 [](const shape::Custom&) {},
             },
             shape);
  return mask;
}

CharImage apply_spot(const CharImage& image, const Mask& mask, int delta, SpotMode mode) {
  if (mask.dims() != image.dims()) throw DimensionMismatch("mask dims differ from image dims");
  if (delta < -255 || delta > 255) throw InvalidArgument("delta outside [-255, 255]");

  CharImage out = image;
  const Dims d = image.dims();
  const double replacement = clamp_intensity(delta);
  for (int row = 0; row < d.height; ++row) {
    for (int col = 0; col < d.width; ++col) {
      if (!mask.at(row, col)) continue;
      for (int ch = 0; ch < CharImage::kChannels; ++ch) {
        if (mode == SpotMode::Replace) {
          out.set(row, col, ch, replacement);
        } else {
          out.set(row, col, ch, image.at(row, col, ch) + delta);
        }
      }
    }
  }
  return out;
}

CharImage apply_spot(const CharImage& image, const SpotSpec& spec) {
  return apply_spot(image, rasterize_mask(spec.shape, spec.position, image.dims()), spec.delta,
                    spec.mode);
}

PixelCount pixel_count(const Mask& mask) {
  const auto bits = mask.bits();
  const long count = std::count(bits.begin(), bits.end(), std::uint8_t{1});
  return {count, bits.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(bits.size())};
}

const char* to_string(SpotMode mode) {
  return mode == SpotMode::Replace ? "replace" : "add-clamp";
}

SpotMode parse_spot_mode(std::string_view text) {
  if (text == "replace") return SpotMode::Replace;
  if (text == "add-clamp" || text == "addclamp" || text == "add") return SpotMode::AddClamp;
  throw InvalidArgument("unknown spot mode '" + std::string(text) + "'");
}

std::string describe(const SpotShape& shape) {
  return std::visit(Overloaded{
                        [](const shape::Rect& s) { return "rect" + std::to_string(s.side); },
                        [](const shape::Circle& s) { return "circle" + std::to_string(s.radius); },
                        [](const shape::Ellipse& s) {
                          return "ellipse" + std::to_string(s.row_radius) + "x" +
                                 std::to_string(s.col_radius);
                        },
                        [](const shape::Custom&) { return std::string("custom"); },
                    },
                    shape);
}

}  // namespace spotattack
