#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spotattack/classifier.hpp"

namespace spotattack {

/// One attacked image: ground truth, clean and adversarial predictions, and the target.
struct EvalRecord {
  std::string source;
  std::string clean_pred;
  std::string adv_pred;
  std::string target;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

/// Untargeted attack success rate: records with a correct clean prediction whose
/// adversarial prediction differs from the source, over records with a correct clean
/// prediction. Throws NoCorrectlyClassifiedSources when the denominator is zero.
double asr(const std::vector<EvalRecord>& records);

/// Same denominator as asr(); numerator requires adv_pred == target.
double targeted_asr(const std::vector<EvalRecord>& records);

/// Successful targeted attacks per (source, target). The diagonal holds the per-class
/// source image count for display only.
class NstaMatrix {
 public:
  NstaMatrix(LabelSet classes, std::vector<long> counts);

  const LabelSet& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }
  long at(std::size_t source, std::size_t target) const { return counts_[source * size() + target]; }
  long at(std::string_view source, std::string_view target) const {
    return at(classes_.index_of(source), classes_.index_of(target));
  }
  long max_count() const;

  friend bool operator==(const NstaMatrix&, const NstaMatrix&) = default;

 private:
  LabelSet classes_;
  std::vector<long> counts_;
};

/// Builds the matrix over `classes` (default: sorted labels seen as source or target).
/// Cell (s, t) counts records with source s, target t, a correct clean prediction and
/// adv_pred == t. Unless `source_counts` is given, the diagonal of s is the largest number
/// of correctly classified records for s against any single target, which is the number
/// of source images when every image is attacked against every target.
NstaMatrix nsta(const std::vector<EvalRecord>& records,
                const std::optional<LabelSet>& classes = {},
                const std::optional<std::map<std::string, long>>& source_counts = {});

struct RowColMeans {
  std::vector<double> rows;
  std::vector<double> cols;
};

/// Off-diagonal means: row s sums over t != s, divided by N - 1; columns likewise.
RowColMeans row_col_means(const NstaMatrix& matrix);

/// CSV: header ",<t1>,<t2>,...", then one "<s>,<n>,<n>,..." line per source.
std::string format_nsta_csv(const NstaMatrix& matrix);
NstaMatrix parse_nsta_csv(std::string_view csv);

/// Writes `<stem>.csv` and `<stem>.png` (linear grayscale, 0 -> black, max -> white,
/// `cell_px` square pixels per cell).
void export_thermal(const NstaMatrix& matrix, const std::filesystem::path& stem, int cell_px = 16);

/// Grayscale cell intensities of the heat image, row-major.
std::vector<std::uint8_t> thermal_intensities(const NstaMatrix& matrix);

/// Records CSV with header `source,clean_pred,adv_pred,target`.
std::string format_records_csv(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> parse_records_csv(std::string_view csv);
std::vector<EvalRecord> read_records_csv(const std::filesystem::path& path);

}  // namespace spotattack
