#include "spotattack/toy_models.hpp"

#include <cmath>
#include <limits>

namespace spotattack {

double planted_fitness(Position p, Position optimum, double tau) {
  const double da = p.a - optimum.a;
  const double db = p.b - optimum.b;
  return std::exp(-(da * da + db * db) / tau);
}

PlantedPositionClassifier::PlantedPositionClassifier(CharImage reference, LabelSet labels,
                                                     std::string target, Position optimum,
                                                     double tau)
    : reference_(std::move(reference)),
      labels_(std::move(labels)),
      target_index_(labels_.index_of(target)),
      optimum_(optimum),
      tau_(tau) {
  if (labels_.size() < 2) throw InvalidArgument("planted classifier needs at least two labels");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
}

ClassProbs PlantedPositionClassifier::predict(const CharImage& image) const {
  if (image.dims() != reference_.dims()) throw DimensionMismatch("planted classifier input dims");
  int top = std::numeric_limits<int>::max();
  int left = std::numeric_limits<int>::max();
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      for (int ch = 0; ch < CharImage::kChannels; ++ch) {
        if (image.at(r, c, ch) != reference_.at(r, c, ch)) {
          top = std::min(top, r);
          left = std::min(left, c);
        }
      }
    }
  }
  const double target = top == std::numeric_limits<int>::max()
                            ? 0.0
                            : planted_fitness({top, left}, optimum_, tau_);
  const double rest = (1.0 - target) / static_cast<double>(labels_.size() - 1);
  ClassProbs probs{std::vector<double>(labels_.size(), rest)};
  probs.values[target_index_] = target;
  return probs;
}

ClassifierModel make_linear_classifier(Dims dims, LabelSet labels,
                                       const std::vector<std::vector<double>>& templates,
                                       const std::vector<double>& biases) {
  const int n = static_cast<int>(labels.size());
  const int features = dims.height * dims.width * CharImage::kChannels;
  if (static_cast<int>(templates.size()) != n || static_cast<int>(biases.size()) != n) {
    throw ShapeMismatch("one template and one bias per class required");
  }
  Layer flatten{"flatten", layer::Flatten{}, {}, {}};
  Layer dense{"dense1", layer::Dense{features, n, Activation::None}, {}, {}};
  dense.weight.shape = {n, features};
  dense.weight.values.reserve(static_cast<std::size_t>(n) * features);
  for (const auto& t : templates) {
    if (static_cast<int>(t.size()) != features) throw ShapeMismatch("template size differs from 3*H*W");
    dense.weight.values.insert(dense.weight.values.end(), t.begin(), t.end());
  }
  dense.bias.shape = {n};
  dense.bias.values = biases;
  Layer softmax{"softmax", layer::Softmax{}, {}, {}};
  return ClassifierModel(dims, std::move(labels), {flatten, dense, softmax});
}

PlantedVulnerableFixture make_planted_vulnerable_fixture() {
  const Dims dims = kCharDims;
  const LabelSet labels = LabelSet::parse("A-F");
  const Position planted{40, 22};
  const int side = 5;
  const int delta = 255;
  const double sigma = 2.5;
  // Logit of the target when the spot sits exactly on the planted cell.
  const double peak_logit = 6.6;

  const double ci = planted.a + (side - 1) / 2.0;
  const double cj = planted.b + (side - 1) / 2.0;
  const std::size_t plane = static_cast<std::size_t>(dims.height) * dims.width;
  std::vector<double> bump(plane * CharImage::kChannels);
  for (int r = 0; r < dims.height; ++r) {
    for (int c = 0; c < dims.width; ++c) {
      const double w = std::exp(-((r - ci) * (r - ci) + (c - cj) * (c - cj)) / (2 * sigma * sigma));
      for (int ch = 0; ch < CharImage::kChannels; ++ch) {
        bump[ch * plane + static_cast<std::size_t>(r) * dims.width + c] = w;
      }
    }
  }
  double peak = 0.0;
  for (int ch = 0; ch < CharImage::kChannels; ++ch) {
    for (int r = planted.a; r < planted.a + side; ++r) {
      for (int c = planted.b; c < planted.b + side; ++c) {
        peak += bump[ch * plane + static_cast<std::size_t>(r) * dims.width + c];
      }
    }
  }
  const double gain = peak_logit / peak;
  for (double& w : bump) w *= gain;

  std::vector<std::vector<double>> templates(labels.size(), std::vector<double>(bump.size(), 0.0));
  const std::size_t target = labels.index_of("F");
  templates[target] = bump;
  std::vector<double> biases(labels.size(), 0.0);
  biases[labels.index_of("A")] = 1.0;

  return {make_linear_classifier(dims, labels, templates, biases),
          CharImage(dims, 0.0),
          "A",
          "F",
          planted,
          side,
          delta};
}

}  // namespace spotattack
