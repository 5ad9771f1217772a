#pragma once

#include <string>
#include <vector>

#include "spotattack/classifier.hpp"

namespace spotattack {

/// exp(-|p - optimum|^2 / tau): a smooth unimodal landscape peaking at 1 on `optimum`.
double planted_fitness(Position p, Position optimum, double tau);

/// Test oracle whose target confidence depends only on where a spot was placed.
///
/// The spot anchor is recovered as the top-left corner of the bounding box of pixels that
/// differ from `reference`, which is the anchor convention of rectangular spots. The target
/// class receives planted_fitness(anchor); the remaining mass is shared evenly by the other
/// classes. An image identical to `reference` gets target confidence 0.
class PlantedPositionClassifier final : public Classifier {
 public:
  PlantedPositionClassifier(CharImage reference, LabelSet labels, std::string target,
                            Position optimum, double tau);

  ClassProbs predict(const CharImage& image) const override;
  const LabelSet& labels() const override { return labels_; }
  Dims input_dims() const override { return reference_.dims(); }

  Position optimum() const { return optimum_; }
  double tau() const { return tau_; }

 private:
  CharImage reference_;
  LabelSet labels_;
  std::size_t target_index_;
  Position optimum_;
  double tau_;
};

/// Softmax over inner products: logit_k = <template_k, image / 255> + bias_k.
/// Each template is planar (channel-major, then row-major) with 3*H*W entries.
ClassifierModel make_linear_classifier(Dims dims, LabelSet labels,
                                       const std::vector<std::vector<double>>& templates,
                                       const std::vector<double>& biases);

/// A linear classifier and a black image it labels `source`, built so that a bright
/// rect spot at exactly `planted` pushes the `target` confidence above 0.99 while every
/// other position stays below it.
struct PlantedVulnerableFixture {
  ClassifierModel model;
  CharImage image;
  std::string source;
  std::string target;
  Position planted;
  int side;
  int delta;
};

PlantedVulnerableFixture make_planted_vulnerable_fixture();

}  // namespace spotattack
