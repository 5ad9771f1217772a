#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spotattack/imaging.hpp"

namespace spotattack {

/// Per-pixel count of how many single-spot masks cover it.
class OverlapMap {
 public:
  OverlapMap(Dims dims, std::vector<int> counts, int contributors);

  Dims dims() const { return dims_; }
  int at(int row, int col) const { return counts_[static_cast<std::size_t>(row) * dims_.width + col]; }
  int contributors() const { return contributors_; }
  int max_count() const;
  const std::vector<int>& counts() const { return counts_; }

 private:
  Dims dims_;
  std::vector<int> counts_;
  int contributors_;
};

/// Successful spot positions for one source -> target pair.
struct PositionRecord {
  std::string source;
  std::string target;
  std::vector<Position> positions;
};

/// Elementwise sum. Throws EmptyList or DimensionMismatch.
OverlapMap overlay(const std::vector<Mask>& masks);

/// Pixels covered by at least `min_overlap` masks.
Mask cluster_mask(const OverlapMap& overlap, int min_overlap = 3);

/// Rasterizes every recorded position with `shape`, overlays them and thresholds.
Mask build_cluster_attack(const PositionRecord& record, const SpotShape& shape, Dims dims,
                          int min_overlap = 3);

/// CSV with header `source,target,a,b`; rows are grouped into records in first-seen order.
std::vector<PositionRecord> read_position_records(const std::filesystem::path& path);
std::vector<PositionRecord> parse_position_records(std::string_view csv);
std::string format_position_records(const std::vector<PositionRecord>& records);

}  // namespace spotattack
