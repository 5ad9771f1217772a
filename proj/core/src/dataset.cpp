#include "spotattack/dataset.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "spotattack/image_io.hpp"

namespace spotattack {

namespace {

constexpr int kFontRows = 7;
constexpr int kFontCols = 5;
constexpr int kBoxRows = 48;
constexpr int kBoxCols = 28;

using Bitmap = std::array<const char*, kFontRows>;

const std::map<char, Bitmap>& font() {
  static const std::map<char, Bitmap> table{
      {'A', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
      {'B', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
      {'C', {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
      {'D', {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."}},
      {'E', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
      {'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
      {'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
      {'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
      {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
      {'3', {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."}},
      {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
      {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
      {'6', {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
      {'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
      {'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
      {'9', {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
  };
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

const std::string& font_characters() {
  static const std::string chars = [] {
    std::string s;
    for (const auto& [c, _] : font()) s.push_back(c);
    return s;
  }();
  return chars;
}

CharImage render_glyph(const GlyphSpec& spec, Rng& rng) {
  const auto it = font().find(spec.character);
  if (it == font().end()) {
    throw UnknownCharacter(std::string("no glyph for character '") + spec.character + "'");
  }
  if (spec.scale_min <= 0.0 || spec.scale_max < spec.scale_min || spec.max_jitter < 0 || spec.noise < 0.0) {
    throw InvalidArgument("invalid glyph augmentation parameters");
  }
  const Bitmap& bitmap = it->second;
  const Dims dims = kCharDims;

  const double scale = spec.scale_min == spec.scale_max
                           ? spec.scale_min
                           : spec.scale_min + (spec.scale_max - spec.scale_min) * rng.uniform01();
  const int box_h = std::max(kFontRows, static_cast<int>(std::lround(kBoxRows * scale)));
  const int box_w = std::max(kFontCols, static_cast<int>(std::lround(kBoxCols * scale)));
  int dr = spec.shift_rows;
  int dc = spec.shift_cols;
  if (spec.max_jitter > 0) {
    dr += static_cast<int>(rng.uniform_int(-spec.max_jitter, spec.max_jitter));
    dc += static_cast<int>(rng.uniform_int(-spec.max_jitter, spec.max_jitter));
  }
  const int top = (dims.height - box_h) / 2 + dr;
  const int left = (dims.width - box_w) / 2 + dc;

  CharImage img(dims);
  for (int r = 0; r < dims.height; ++r) {
    for (int c = 0; c < dims.width; ++c) {
      bool on = false;
      const int br = r - top;
      const int bc = c - left;
      if (br >= 0 && br < box_h && bc >= 0 && bc < box_w) {
        on = bitmap[br * kFontRows / box_h][bc * kFontCols / box_w] == '#';
      }
      const auto& base = on ? spec.foreground : spec.background;
      for (int ch = 0; ch < CharImage::kChannels; ++ch) {
        double v = base[ch];
        if (spec.noise > 0.0) v += spec.noise * (2.0 * rng.uniform01() - 1.0);
        img.set(r, c, ch, std::nearbyint(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return img;
}

std::uint64_t image_hash(const CharImage& image) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : image.data()) {
    h ^= quantize(v);
    h *= 0x100000001b3ULL;
  }
  return h;
}

Dataset build_dataset(const DatasetConfig& config) {
  if (config.train_per_class < 0 || config.test_per_class < 0) {
    throw InvalidArgument("per-class counts must be non-negative");
  }
  Dataset ds{{"train", {}}, {"test", {}}};
  std::unordered_set<std::uint64_t> train_hashes;

  auto fill = [&](LabeledSet& set, std::uint64_t split_id, int per_class, bool avoid_train) {
    for (std::size_t k = 0; k < config.classes.size(); ++k) {
      const std::string& label = config.classes[k];
      if (label.size() != 1) throw UnknownCharacter("glyph labels must be single characters: '" + label + "'");
      for (int i = 0; i < per_class; ++i) {
        GlyphSpec spec = config.augment;
        spec.character = label[0];
        for (std::uint64_t attempt = 0;; ++attempt) {
          Rng rng(derive_seed(config.seed, {split_id, k, static_cast<std::uint64_t>(i), attempt}));
          CharImage img = render_glyph(spec, rng);
          const std::uint64_t h = image_hash(img);
          if (avoid_train && train_hashes.contains(h)) continue;
          if (!avoid_train) train_hashes.insert(h);
          set.items.push_back({std::move(img), label, label + "_" + std::to_string(i)});
          break;
        }
      }
    }
  };
  fill(ds.train, 0, config.train_per_class, false);
  fill(ds.test, 1, config.test_per_class, true);
  return ds;
}

void write_labeled_set(const LabeledSet& set, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  if (ec) throw IoError("cannot create " + (dir / "images").string() + ": " + ec.message());
  std::string csv = "filename,label\n";
  for (const auto& item : set.items) {
    const std::string rel = "images/" + item.name + ".png";
    write_png(item.image, dir / rel);
    csv += rel + "," + item.label + "\n";
  }
  std::ofstream f(dir / "labels.csv", std::ios::binary);
  if (!f) throw IoError("cannot write " + (dir / "labels.csv").string());
  f << csv;
}

LabeledSet read_labeled_set(const std::filesystem::path& dir, std::string split) {
  const std::string csv = read_text(dir / "labels.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "filename,label") throw ParseError("labels.csv header must be 'filename,label'");
  LabeledSet set{std::move(split), {}};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw ParseError("labels.csv: malformed line '" + line + "'");
    const std::string file = line.substr(0, comma);
    const std::string label = line.substr(comma + 1);
    set.items.push_back({read_png(dir / file), label, std::filesystem::path(file).stem().string()});
  }
  return set;
}

LabeledSet select_source_set(const Classifier& model, const LabeledSet& pool, int per_class,
                             const LabelSet& classes) {
  if (per_class < 0) throw InvalidArgument("per_class must be non-negative");
  LabeledSet out{"source", {}};
  if (per_class == 0) return out;
  for (const auto& label : classes.names()) {
    int taken = 0;
    for (const auto& item : pool.items) {
      if (taken == per_class) break;
      if (item.label != label) continue;
      if (classify(model, item.image).label != label) continue;
      out.items.push_back(item);
      ++taken;
    }
    if (taken < per_class) {
      throw InsufficientCorrectImages("only " + std::to_string(taken) + " correctly classified '" + label +
                                      "' images, need " + std::to_string(per_class));
    }
  }
  return out;
}

}  // namespace spotattack
