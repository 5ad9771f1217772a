#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spotattack/classifier.hpp"
#include "spotattack/ga_search.hpp"
#include "spotattack/imaging.hpp"

namespace spotattack {

/// Spot appearance for an attack; the position is what the search decides.
struct SpotTemplate {
  SpotShape shape = shape::Rect{5};
  int delta = 200;
  SpotMode mode = SpotMode::Replace;
};

struct AttackTask {
  CharImage source_image;
  std::string source_label;
  std::string target_label;
  SpotTemplate spot;
  GaParams ga;
};

struct AttackOutcome {
  std::string source_label;
  std::string target_label;
  SearchResult search;
  CharImage adversarial_image;
  Mask mask;
  std::string predicted_label;
  double predicted_confidence = 0.0;
  /// Probability of target_label on the adversarial image.
  double target_confidence = 0.0;
  /// Argmax equals the target.
  bool success = false;
  /// Argmax differs from the source.
  bool untargeted_success = false;
};

/// Fitness for a target class: position -> target confidence of the spotted image.
FitnessFn make_spot_fitness(const Classifier& model, const CharImage& source,
                            const SpotTemplate& spot, std::string target_label);

/// Searches the spot position maximizing the target confidence, then re-classifies the
/// best adversarial image. Throws SourceMisclassified when the clean image is not
/// predicted as the source label, InvalidArgument when source == target.
AttackOutcome targeted_attack(const AttackTask& task, const Classifier& model);

/// Index of the outcome with the highest target confidence; ties go to the lowest
/// label index in `labels`.
std::size_t pick_best_outcome(const std::vector<AttackOutcome>& outcomes, const LabelSet& labels);

/// Attacks every candidate target (default: every other class of the model). Candidate
/// i runs with GA seed `ga.seed ^ label_index(candidate)`.
struct TargetChoice {
  std::string target_label;
  AttackOutcome outcome;
  std::vector<AttackOutcome> all;
};
TargetChoice best_target_for_source(const CharImage& source_image, const std::string& source_label,
                                    const std::optional<std::vector<std::string>>& candidates,
                                    const SpotTemplate& spot, const GaParams& ga,
                                    const Classifier& model, int workers = 1);

struct PlateCharacter {
  CharImage image;
  std::string label;
};

struct PlateChoice {
  std::size_t index = 0;
  std::string target_label;
  AttackOutcome outcome;
};

/// Picks the single character whose best targeted attack reaches the highest target
/// confidence. Characters the model misreads when clean are skipped; throws
/// NoAttackableCharacter if none remain.
PlateChoice select_plate_source(const std::vector<PlateCharacter>& characters,
                                const SpotTemplate& spot, const GaParams& ga,
                                const Classifier& model,
                                const std::optional<std::vector<std::string>>& candidates = {},
                                int workers = 1);

struct TransferResult {
  std::string label;
  double confidence = 0.0;
  double target_confidence = 0.0;
  bool targeted_success = false;
  bool untargeted_success = false;
};

/// Re-classifies an adversarial image under a different model.
TransferResult evaluate_transfer(const AttackOutcome& outcome, const Classifier& other_model);

/// Outcome summary: position, fitness, labels, confidences, success, query count.
std::string to_json(const AttackOutcome& outcome);

}  // namespace spotattack
