#include "spotattack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "spotattack/image_io.hpp"

namespace spotattack {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string f;
  std::stringstream ss(line);
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::vector<std::string> csv_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

struct Tally {
  long correct = 0;
  long flipped = 0;
  long hit_target = 0;
};

Tally tally(const std::vector<EvalRecord>& records) {
  Tally t;
  for (const auto& r : records) {
    if (r.clean_pred != r.source) continue;
    ++t.correct;
    if (r.adv_pred != r.source) ++t.flipped;
    if (r.adv_pred == r.target) ++t.hit_target;
  }
  if (t.correct == 0) throw NoCorrectlyClassifiedSources("no record has a correctly classified clean source");
  return t;
}

}  // namespace

double asr(const std::vector<EvalRecord>& records) {
  const Tally t = tally(records);
  return static_cast<double>(t.flipped) / static_cast<double>(t.correct);
}

double targeted_asr(const std::vector<EvalRecord>& records) {
  const Tally t = tally(records);
  return static_cast<double>(t.hit_target) / static_cast<double>(t.correct);
}

NstaMatrix::NstaMatrix(LabelSet classes, std::vector<long> counts)
    : classes_(std::move(classes)), counts_(std::move(counts)) {
  if (counts_.size() != classes_.size() * classes_.size()) {
    throw DimensionMismatch("NSTA counts must be N x N");
  }
  for (long c : counts_) {
    if (c < 0) throw InvalidArgument("NSTA counts must be non-negative");
  }
}

long NstaMatrix::max_count() const {
  return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

NstaMatrix nsta(const std::vector<EvalRecord>& records, const std::optional<LabelSet>& classes,
                const std::optional<std::map<std::string, long>>& source_counts) {
  LabelSet order;
  if (classes) {
    order = *classes;
  } else {
    std::set<std::string> seen;
    for (const auto& r : records) {
      seen.insert(r.source);
      seen.insert(r.target);
    }
    if (seen.empty()) throw EmptyList("NSTA over an empty record list");
    order = LabelSet(std::vector<std::string>(seen.begin(), seen.end()));
  }
  const std::size_t n = order.size();
  std::vector<long> counts(n * n, 0);
  std::vector<long> per_pair(n * n, 0);
  for (const auto& r : records) {
    if (!order.contains(r.source) || !order.contains(r.target)) continue;
    if (r.clean_pred != r.source) continue;
    const std::size_t s = order.index_of(r.source);
    const std::size_t t = order.index_of(r.target);
    ++per_pair[s * n + t];
    if (s != t && r.adv_pred == r.target) ++counts[s * n + t];
  }
  for (std::size_t s = 0; s < n; ++s) {
    long diag = 0;
    if (source_counts) {
      auto it = source_counts->find(order[s]);
      if (it != source_counts->end()) diag = it->second;
    } else {
      for (std::size_t t = 0; t < n; ++t) diag = std::max(diag, per_pair[s * n + t]);
    }
    counts[s * n + s] = diag;
  }
  return NstaMatrix(std::move(order), std::move(counts));
}

RowColMeans row_col_means(const NstaMatrix& m) {
  const std::size_t n = m.size();
  RowColMeans out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  if (n < 2) return out;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      out.rows[s] += static_cast<double>(m.at(s, t));
      out.cols[t] += static_cast<double>(m.at(s, t));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.rows[i] /= static_cast<double>(n - 1);
    out.cols[i] /= static_cast<double>(n - 1);
  }
  return out;
}

std::string format_nsta_csv(const NstaMatrix& m) {
  std::string out;
  for (std::size_t t = 0; t < m.size(); ++t) out += "," + m.classes()[t];
  out += "\n";
  for (std::size_t s = 0; s < m.size(); ++s) {
    out += m.classes()[s];
    for (std::size_t t = 0; t < m.size(); ++t) out += "," + std::to_string(m.at(s, t));
    out += "\n";
  }
  return out;
}

NstaMatrix parse_nsta_csv(std::string_view csv) {
  const auto lines = csv_lines(csv);
  if (lines.empty()) throw ParseError("NSTA CSV is empty");
  auto header = split_csv_line(lines[0]);
  if (header.empty() || !header[0].empty()) throw ParseError("NSTA CSV header must start with an empty cell");
  std::vector<std::string> names(header.begin() + 1, header.end());
  const std::size_t n = names.size();
  if (lines.size() != n + 1) throw ParseError("NSTA CSV must have one row per class");
  std::vector<long> counts;
  counts.reserve(n * n);
  for (std::size_t s = 0; s < n; ++s) {
    auto fields = split_csv_line(lines[s + 1]);
    if (fields.size() != n + 1 || fields[0] != names[s]) {
      throw ParseError("NSTA CSV row " + std::to_string(s + 1) + " is malformed");
    }
    for (std::size_t t = 1; t <= n; ++t) {
      try {
        std::size_t used = 0;
        counts.push_back(std::stol(fields[t], &used));
        if (used != fields[t].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("NSTA CSV has a non-integer cell");
      }
    }
  }
  return NstaMatrix(LabelSet(std::move(names)), std::move(counts));
}

std::vector<std::uint8_t> thermal_intensities(const NstaMatrix& m) {
  const long peak = m.max_count();
  std::vector<std::uint8_t> out;
  out.reserve(m.size() * m.size());
  for (std::size_t s = 0; s < m.size(); ++s) {
    for (std::size_t t = 0; t < m.size(); ++t) {
      const double v = peak == 0 ? 0.0 : 255.0 * static_cast<double>(m.at(s, t)) / static_cast<double>(peak);
      out.push_back(static_cast<std::uint8_t>(std::lround(v)));
    }
  }
  return out;
}

void export_thermal(const NstaMatrix& m, const std::filesystem::path& stem, int cell_px) {
  if (cell_px < 1) throw InvalidArgument("cell_px must be >= 1");
  auto csv_path = stem;
  csv_path += ".csv";
  {
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw IoError("cannot open " + csv_path.string() + " for writing");
    f << format_nsta_csv(m);
    if (!f) throw IoError("failed writing " + csv_path.string());
  }
  const auto cells = thermal_intensities(m);
  const int n = static_cast<int>(m.size());
  const Dims dims{n * cell_px, n * cell_px};
  std::vector<std::uint8_t> px(static_cast<std::size_t>(dims.height) * dims.width);
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      px[static_cast<std::size_t>(y) * dims.width + x] = cells[static_cast<std::size_t>(y / cell_px) * n + x / cell_px];
    }
  }
  auto png_path = stem;
  png_path += ".png";
  write_gray_png(px, dims, png_path);
}

std::string format_records_csv(const std::vector<EvalRecord>& records) {
  std::string out = "source,clean_pred,adv_pred,target\n";
  for (const auto& r : records) out += r.source + "," + r.clean_pred + "," + r.adv_pred + "," + r.target + "\n";
  return out;
}

std::vector<EvalRecord> parse_records_csv(std::string_view csv) {
  const auto lines = csv_lines(csv);
  if (lines.empty() || lines[0] != "source,clean_pred,adv_pred,target") {
    throw ParseError("records CSV header must be 'source,clean_pred,adv_pred,target'");
  }
  std::vector<EvalRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_csv_line(lines[i]);
    if (f.size() != 4) throw ParseError("records CSV line " + std::to_string(i + 1) + ": expected 4 fields");
    out.push_back({f[0], f[1], f[2], f[3]});
  }
  return out;
}

std::vector<EvalRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_records_csv(ss.str());
}

}  // namespace spotattack
