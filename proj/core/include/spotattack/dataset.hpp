#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spotattack/classifier.hpp"
#include "spotattack/imaging.hpp"
#include "spotattack/rng.hpp"

namespace spotattack {

/// Characters the built-in bitmap font can draw.
const std::string& font_characters();

struct GlyphSpec {
  char character = 'A';
  std::array<double, 3> foreground{235.0, 235.0, 235.0};
  std::array<double, 3> background{25.0, 55.0, 165.0};
  /// Fixed offset of the glyph box.
  int shift_rows = 0;
  int shift_cols = 0;
  /// Additional random offset, uniform in [-max_jitter, max_jitter] on each axis.
  int max_jitter = 0;
  /// Per-channel uniform noise amplitude.
  double noise = 0.0;
  /// Glyph box scale, uniform in [scale_min, scale_max].
  double scale_min = 1.0;
  double scale_max = 1.0;
};

/// Draws `spec.character` from a 5x7 bitmap font scaled to about 80% of a 60x35 cell.
/// Intensities are integral so the image survives PNG storage unchanged.
/// Throws UnknownCharacter.
CharImage render_glyph(const GlyphSpec& spec, Rng& rng);

struct LabeledImage {
  CharImage image;
  std::string label;
  /// File stem, e.g. "A_3".
  std::string name;
};

struct LabeledSet {
  std::string split;
  std::vector<LabeledImage> items;
};

struct DatasetConfig {
  int train_per_class = 150;
  int test_per_class = 30;
  std::uint64_t seed = 1;
  LabelSet classes = LabelSet::standard();
  /// Augmentation template; `character` is overwritten per item.
  GlyphSpec augment{'A', {235.0, 235.0, 235.0}, {25.0, 55.0, 165.0}, 0, 0, 3, 12.0, 0.9, 1.05};
};

struct Dataset {
  LabeledSet train;
  LabeledSet test;
};

/// Renders train and test splits with per-item derived seeds. No test image is
/// byte-identical to a train image.
Dataset build_dataset(const DatasetConfig& config);

/// Writes `images/<label>_<index>.png` and `labels.csv` (`filename,label`) under `dir`.
void write_labeled_set(const LabeledSet& set, const std::filesystem::path& dir);
/// Reads a directory written by write_labeled_set.
LabeledSet read_labeled_set(const std::filesystem::path& dir, std::string split = "");

/// First `per_class` images of each class in `classes` that `model` classifies correctly.
/// Throws InsufficientCorrectImages.
LabeledSet select_source_set(const Classifier& model, const LabeledSet& pool, int per_class,
                             const LabelSet& classes);

/// FNV-1a over the 8-bit quantized pixels.
std::uint64_t image_hash(const CharImage& image);

}  // namespace spotattack
