#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spotattack/imaging.hpp"

namespace spotattack {

/// Ordered, unique class names. Index i is the i-th output of a classifier.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels);

  /// The 16 classes A-F, 0-9 used by the standard pipeline.
  static LabelSet standard();
  /// Parses a comma-separated list, or a range such as "A-F".
  static LabelSet parse(std::string_view text);

  std::size_t size() const { return labels_.size(); }
  const std::string& operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& names() const { return labels_; }
  bool contains(std::string_view label) const;
  /// Throws UnknownLabel.
  std::size_t index_of(std::string_view label) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> labels_;
};

/// Output of a classifier: one probability per class, summing to 1.
struct ClassProbs {
  std::vector<double> values;
};

struct Prediction {
  std::size_t index = 0;
  std::string label;
  double confidence = 0.0;
};

/// Argmax; ties go to the lowest index.
Prediction label_of(const ClassProbs& probs, const LabelSet& labels);

/// Black-box oracle. Search code only ever sees predictions.
/// Implementations must be safe to call concurrently.
class Classifier {
 public:
  virtual ~Classifier() = default;

  /// Throws DimensionMismatch when `image` does not match input_dims().
  virtual ClassProbs predict(const CharImage& image) const = 0;
  virtual const LabelSet& labels() const = 0;
  virtual Dims input_dims() const = 0;
};

/// Probability of `target` for `image`. Throws UnknownLabel.
double confidence(const Classifier& model, const CharImage& image, std::string_view target);

Prediction classify(const Classifier& model, const CharImage& image);

enum class Activation { None, Relu };

namespace layer {

struct Conv {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 5;
  int padding = 2;
  Activation activation = Activation::Relu;
};
struct MaxPool {
  int window = 3;
  int stride = 2;
};
struct Flatten {};
struct Dense {
  int in_features = 0;
  int out_features = 0;
  Activation activation = Activation::None;
};
struct Softmax {};

}  // namespace layer

using LayerSpec = std::variant<layer::Conv, layer::MaxPool, layer::Flatten, layer::Dense, layer::Softmax>;

/// Dense row-major tensor.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  std::size_t element_count() const;
};

struct Layer {
  std::string name;
  LayerSpec spec;
  /// Conv: [out][in][row][col]; Dense: [out][in]. Empty for parameter-free layers.
  Tensor weight;
  Tensor bias;
};

/// Shape of an activation: channels x height x width.
struct ActivationShape {
  int channels = 0;
  int height = 0;
  int width = 0;

  long size() const { return static_cast<long>(channels) * height * width; }
  friend bool operator==(const ActivationShape&, const ActivationShape&) = default;
};

/// Conv(5x5, 3->16, same, ReLU) -> MaxPool(3, 2) -> Conv(5x5, 16->32) -> MaxPool(3, 2)
/// -> Conv(5x5, 32->32) -> Flatten -> Dense(->classes) -> Softmax, for a 60x35x3 input.
std::vector<LayerSpec> standard_architecture(std::size_t num_classes, Dims input = kCharDims);

/// Output shape of each layer in turn; throws ShapeMismatch if they do not compose.
std::vector<ActivationShape> infer_shapes(const std::vector<LayerSpec>& architecture, Dims input);

/// Feed-forward CNN built from Conv/MaxPool/Flatten/Dense/Softmax layers.
/// Input intensities are divided by 255 before the first layer.
class ClassifierModel final : public Classifier {
 public:
  /// Validates layer composition and every tensor shape; throws ShapeMismatch.
  ClassifierModel(Dims input, LabelSet labels, std::vector<Layer> layers);

  ClassProbs predict(const CharImage& image) const override;
  const LabelSet& labels() const override { return labels_; }
  Dims input_dims() const override { return input_; }

  const std::vector<Layer>& layers() const { return layers_; }
  static constexpr const char* kPreprocessing = "scale255";

 private:
  Dims input_;
  LabelSet labels_;
  std::vector<Layer> layers_;
};

/// Allocates correctly-shaped tensors for `architecture`. Weights are drawn from
/// N(0, 2/fan_in) when `seed` is non-zero and left at zero otherwise.
ClassifierModel make_model(const std::vector<LayerSpec>& architecture, LabelSet labels,
                           Dims input, unsigned long long seed);

/// Weight-bundle JSON (format_version 1).
ClassifierModel load_model(const std::filesystem::path& path);
ClassifierModel parse_model(std::string_view json_text);
std::string serialize_model(const ClassifierModel& model);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);

}  // namespace spotattack
