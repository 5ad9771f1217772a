#include "spotattack/cluster.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace spotattack {

OverlapMap::OverlapMap(Dims dims, std::vector<int> counts, int contributors)
    : dims_(dims), counts_(std::move(counts)), contributors_(contributors) {
  if (counts_.size() != static_cast<std::size_t>(dims.height) * dims.width) {
    throw DimensionMismatch("overlap counts do not match dims");
  }
}

int OverlapMap::max_count() const {
  return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

OverlapMap overlay(const std::vector<Mask>& masks) {
  if (masks.empty()) throw EmptyList("overlay of an empty mask list");
  const Dims dims = masks.front().dims();
  std::vector<int> counts(static_cast<std::size_t>(dims.height) * dims.width, 0);
  for (const auto& m : masks) {
    if (m.dims() != dims) throw DimensionMismatch("overlay masks differ in dims");
    const auto bits = m.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) counts[i] += bits[i];
  }
  return OverlapMap(dims, std::move(counts), static_cast<int>(masks.size()));
}

Mask cluster_mask(const OverlapMap& overlap, int min_overlap) {
  if (min_overlap < 1) throw InvalidArgument("min_overlap must be >= 1");
  std::vector<std::uint8_t> bits;
  bits.reserve(overlap.counts().size());
  for (int c : overlap.counts()) bits.push_back(c >= min_overlap ? 1 : 0);
  return Mask(overlap.dims(), std::move(bits));
}

Mask build_cluster_attack(const PositionRecord& record, const SpotShape& shape, Dims dims,
                          int min_overlap) {
  if (record.positions.empty()) {
    throw EmptyList("no positions recorded for " + record.source + " -> " + record.target);
  }
  std::vector<Mask> masks;
  masks.reserve(record.positions.size());
  for (Position p : record.positions) masks.push_back(rasterize_mask(shape, p, dims));
  return cluster_mask(overlay(masks), min_overlap);
}

std::vector<PositionRecord> parse_position_records(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("position CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "source,target,a,b") throw ParseError("position CSV header must be 'source,target,a,b'");

  std::vector<PositionRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 4) throw ParseError("position CSV line " + std::to_string(line_no) + ": expected 4 fields");
    Position p;
    try {
      std::size_t used_a = 0;
      std::size_t used_b = 0;
      p.a = std::stoi(fields[2], &used_a);
      p.b = std::stoi(fields[3], &used_b);
      if (used_a != fields[2].size() || used_b != fields[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("position CSV line " + std::to_string(line_no) + ": bad coordinate");
    }
    auto it = std::find_if(records.begin(), records.end(), [&](const PositionRecord& r) {
      return r.source == fields[0] && r.target == fields[1];
    });
    if (it == records.end()) {
      records.push_back({fields[0], fields[1], {}});
      it = std::prev(records.end());
    }
    it->positions.push_back(p);
  }
  return records;
}

std::vector<PositionRecord> read_position_records(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_position_records(ss.str());
}

std::string format_position_records(const std::vector<PositionRecord>& records) {
  std::string out = "source,target,a,b\n";
  for (const auto& r : records) {
    for (Position p : r.positions) {
      out += r.source + "," + r.target + "," + std::to_string(p.a) + "," + std::to_string(p.b) + "\n";
    }
  }
  return out;
}

}  // namespace spotattack
