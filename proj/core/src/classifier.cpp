#include "spotattack/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "spotattack/rng.hpp"

namespace spotattack {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) ss << (i ? "," : "") << shape[i];
  ss << ']';
  return ss.str();
}

void expect_shape(const Layer& layer, const Tensor& t, const std::vector<int>& expected,
                  const char* what) {
  if (t.shape != expected || t.values.size() != t.element_count()) {
    throw ShapeMismatch("layer '" + layer.name + "' " + what + ": expected " + shape_str(expected) +
                        " with " +
                        std::to_string(std::accumulate(expected.begin(), expected.end(), 1L,
                                                       std::multiplies<>())) +
                        " values, got " + shape_str(t.shape) + " with " +
                        std::to_string(t.values.size()));
  }
}

struct Activations {
  ActivationShape shape;
  std::vector<double> values;
};

void apply_activation(std::vector<double>& v, Activation act) {
  if (act == Activation::Relu) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
  }
}

Activations run_conv(const Activations& in, const layer::Conv& spec, const Layer& layer) {
  const int k = spec.kernel;
  const int pad = spec.padding;
  const int ih = in.shape.height;
  const int iw = in.shape.width;
  const ActivationShape out_shape{spec.out_channels, ih + 2 * pad - k + 1, iw + 2 * pad - k + 1};
  Activations out{out_shape, std::vector<double>(static_cast<std::size_t>(out_shape.size()))};
  const double* w = layer.weight.values.data();
  const double* x = in.values.data();
  const int oh = out_shape.height;
  const int ow = out_shape.width;

  for (int o = 0; o < spec.out_channels; ++o) {
    double* dst = out.values.data() + static_cast<std::size_t>(o) * oh * ow;
    std::fill(dst, dst + static_cast<std::ptrdiff_t>(oh) * ow, layer.bias.values[o]);
    for (int i = 0; i < spec.in_channels; ++i) {
      const double* src = x + static_cast<std::size_t>(i) * ih * iw;
      for (int ky = 0; ky < k; ++ky) {
        // Output rows y that read input row y + ky - pad inside [0, ih).
        const int y_lo = std::max(0, pad - ky);
        const int y_hi = std::min(oh, ih + pad - ky);
        for (int kx = 0; kx < k; ++kx) {
          const double wv = w[((static_cast<std::size_t>(o) * spec.in_channels + i) * k + ky) * k + kx];
          if (wv == 0.0) continue;
          const int x_lo = std::max(0, pad - kx);
          const int x_hi = std::min(ow, iw + pad - kx);
          for (int y = y_lo; y < y_hi; ++y) {
            const double* srow = src + static_cast<std::size_t>(y + ky - pad) * iw;
            double* drow = dst + static_cast<std::size_t>(y) * ow;
            const int shift = kx - pad;
            for (int xx = x_lo; xx < x_hi; ++xx) drow[xx] += wv * srow[xx + shift];
          }
        }
      }
    }
  }
  apply_activation(out.values, spec.activation);
  return out;
}

Activations run_pool(const Activations& in, const layer::MaxPool& spec) {
  const ActivationShape s = in.shape;
  const ActivationShape out_shape{s.channels, (s.height - spec.window) / spec.stride + 1,
                                  (s.width - spec.window) / spec.stride + 1};
  Activations out{out_shape, std::vector<double>(static_cast<std::size_t>(out_shape.size()))};
  for (int c = 0; c < s.channels; ++c) {
    const double* src = in.values.data() + static_cast<std::size_t>(c) * s.height * s.width;
    double* dst = out.values.data() + static_cast<std::size_t>(c) * out_shape.height * out_shape.width;
    for (int y = 0; y < out_shape.height; ++y) {
      for (int x = 0; x < out_shape.width; ++x) {
        double m = -INFINITY;
        for (int dy = 0; dy < spec.window; ++dy) {
          for (int dx = 0; dx < spec.window; ++dx) {
            m = std::max(m, src[static_cast<std::size_t>(y * spec.stride + dy) * s.width +
                                x * spec.stride + dx]);
          }
        }
        dst[static_cast<std::size_t>(y) * out_shape.width + x] = m;
      }
    }
  }
  return out;
}

Activations run_dense(const Activations& in, const layer::Dense& spec, const Layer& layer) {
  Activations out{{spec.out_features, 1, 1}, std::vector<double>(spec.out_features)};
  const double* w = layer.weight.values.data();
  for (int o = 0; o < spec.out_features; ++o) {
    const double* row = w + static_cast<std::size_t>(o) * spec.in_features;
    double acc = layer.bias.values[o];
    for (int i = 0; i < spec.in_features; ++i) acc += row[i] * in.values[i];
    out.values[o] = acc;
  }
  apply_activation(out.values, spec.activation);
  return out;
}

void run_softmax(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

}  // namespace

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw InvalidArgument("label set must not be empty");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw InvalidArgument("labels must be non-empty strings");
    if (!seen.insert(l).second) throw InvalidArgument("duplicate label '" + l + "'");
  }
}

LabelSet LabelSet::standard() {
  return LabelSet({"A", "B", "C", "D", "E", "F", "0", "1", "2", "3", "4", "5", "6", "7", "8", "9"});
}

LabelSet LabelSet::parse(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  auto flush = [&] {
    if (item.size() == 3 && item[1] == '-' && item[0] < item[2]) {
      for (char c = item[0]; c <= item[2]; ++c) out.emplace_back(1, c);
    } else if (!item.empty()) {
      out.push_back(item);
    }
    item.clear();
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else if (c != ' ') {
      item.push_back(c);
    }
  }
  flush();
  return LabelSet(std::move(out));
}

bool LabelSet::contains(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t LabelSet::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw UnknownLabel("unknown label '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

Prediction label_of(const ClassProbs& probs, const LabelSet& labels) {
  if (probs.values.size() != labels.size()) {
    throw DimensionMismatch("probability vector length differs from label count");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.values.size(); ++i) {
    if (probs.values[i] > probs.values[best]) best = i;
  }
  return {best, labels[best], probs.values[best]};
}

double confidence(const Classifier& model, const CharImage& image, std::string_view target) {
  const std::size_t idx = model.labels().index_of(target);
  return model.predict(image).values[idx];
}

Prediction classify(const Classifier& model, const CharImage& image) {
  return label_of(model.predict(image), model.labels());
}

std::size_t Tensor::element_count() const {
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(std::max(d, 0));
  return n;
}

std::vector<LayerSpec> standard_architecture(std::size_t num_classes, Dims input) {
  std::vector<LayerSpec> arch{
      layer::Conv{3, 16, 5, 2, Activation::Relu},
      layer::MaxPool{3, 2},
      layer::Conv{16, 32, 5, 2, Activation::Relu},
      layer::MaxPool{3, 2},
      layer::Conv{32, 32, 5, 2, Activation::Relu},
      layer::Flatten{},
  };
  const ActivationShape flat = infer_shapes(arch, input).back();
  arch.emplace_back(layer::Dense{static_cast<int>(flat.size()), static_cast<int>(num_classes),
                                 Activation::None});
  arch.emplace_back(layer::Softmax{});
  return arch;
}

std::vector<ActivationShape> infer_shapes(const std::vector<LayerSpec>& architecture, Dims input) {
  ActivationShape cur{CharImage::kChannels, input.height, input.width};
  bool flat = false;
  std::vector<ActivationShape> shapes;
  shapes.reserve(architecture.size());
  for (std::size_t idx = 0; idx < architecture.size(); ++idx) {
    const std::string where = "layer " + std::to_string(idx);
    std::visit(
        Overloaded{
            [&](const layer::Conv& c) {
              if (flat) throw ShapeMismatch(where + ": conv after flatten");
              if (c.kernel < 1 || c.padding < 0 || c.out_channels < 1) {
                throw ShapeMismatch(where + ": invalid conv parameters");
              }
              if (c.in_channels != cur.channels) {
                throw ShapeMismatch(where + ": conv expects " + std::to_string(c.in_channels) +
                                    " input channels, got " + std::to_string(cur.channels));
              }
              cur = {c.out_channels, cur.height + 2 * c.padding - c.kernel + 1,
                     cur.width + 2 * c.padding - c.kernel + 1};
              if (cur.height < 1 || cur.width < 1) throw ShapeMismatch(where + ": conv output empty");
            },
            [&](const layer::MaxPool& p) {
              if (flat) throw ShapeMismatch(where + ": pool after flatten");
              if (p.window < 1 || p.stride < 1 || p.window > cur.height || p.window > cur.width) {
                throw ShapeMismatch(where + ": pool window does not fit");
              }
              cur = {cur.channels, (cur.height - p.window) / p.stride + 1,
                     (cur.width - p.window) / p.stride + 1};
            },
            [&](const layer::Flatten&) {
              cur = {static_cast<int>(cur.size()), 1, 1};
              flat = true;
            },
            [&](const layer::Dense& d) {
              if (!flat) throw ShapeMismatch(where + ": dense requires a preceding flatten");
              if (d.in_features != cur.channels) {
                throw ShapeMismatch(where + ": dense expects " + std::to_string(d.in_features) +
                                    " inputs, got " + std::to_string(cur.channels));
              }
              if (d.out_features < 1) throw ShapeMismatch(where + ": dense has no outputs");
              cur = {d.out_features, 1, 1};
            },
            [&](const layer::Softmax&) {
              if (!flat) throw ShapeMismatch(where + ": softmax requires a flat input");
            },
        },
        architecture[idx]);
    shapes.push_back(cur);
  }
  return shapes;
}

ClassifierModel::ClassifierModel(Dims input, LabelSet labels, std::vector<Layer> layers)
    : input_(input), labels_(std::move(labels)), layers_(std::move(layers)) {
  if (input_.height < 1 || input_.width < 1) throw ShapeMismatch("model input dims must be positive");
  if (layers_.empty()) throw ShapeMismatch("model has no layers");
  std::vector<LayerSpec> arch;
  arch.reserve(layers_.size());
  for (const auto& l : layers_) arch.push_back(l.spec);
  const auto shapes = infer_shapes(arch, input_);

  if (!std::holds_alternative<layer::Softmax>(layers_.back().spec)) {
    throw ShapeMismatch("final layer must be softmax");
  }
  if (shapes.back().size() != static_cast<long>(labels_.size())) {
    throw ShapeMismatch("model output dimension " + std::to_string(shapes.back().size()) +
                        " differs from label count " + std::to_string(labels_.size()));
  }
  for (const auto& l : layers_) {
    std::visit(Overloaded{
                   [&](const layer::Conv& c) {
                     expect_shape(l, l.weight, {c.out_channels, c.in_channels, c.kernel, c.kernel},
                                  "weight");
                     expect_shape(l, l.bias, {c.out_channels}, "bias");
                   },
                   [&](const layer::Dense& d) {
                     expect_shape(l, l.weight, {d.out_features, d.in_features}, "weight");
                     expect_shape(l, l.bias, {d.out_features}, "bias");
                   },
                   [&](const auto&) {
                     if (!l.weight.values.empty() || !l.bias.values.empty()) {
                       throw ShapeMismatch("layer '" + l.name + "' takes no tensors");
                     }
                   },
               },
               l.spec);
  }
}

ClassProbs ClassifierModel::predict(const CharImage& image) const {
  if (image.dims() != input_) {
    throw DimensionMismatch("model expects " + std::to_string(input_.height) + "x" +
                            std::to_string(input_.width) + " input, got " +
                            std::to_string(image.height()) + "x" + std::to_string(image.width()));
  }
  // Interleaved HWC in [0, 255] -> planar CHW in [0, 1].
  const int h = input_.height;
  const int w = input_.width;
  Activations act{{CharImage::kChannels, h, w},
                  std::vector<double>(static_cast<std::size_t>(h) * w * CharImage::kChannels)};
  const auto px = image.data();
  for (int c = 0; c < CharImage::kChannels; ++c) {
    for (int p = 0; p < h * w; ++p) {
      act.values[static_cast<std::size_t>(c) * h * w + p] = px[static_cast<std::size_t>(p) * 3 + c] / 255.0;
    }
  }

  for (const auto& l : layers_) {
    std::visit(Overloaded{
                   [&](const layer::Conv& c) { act = run_conv(act, c, l); },
                   [&](const layer::MaxPool& p) { act = run_pool(act, p); },
                   [&](const layer::Flatten&) {
                     act.shape = {static_cast<int>(act.shape.size()), 1, 1};
                   },
                   [&](const layer::Dense& d) { act = run_dense(act, d, l); },
                   [&](const layer::Softmax&) { run_softmax(act.values); },
               },
               l.spec);
  }
  return {std::move(act.values)};
}

ClassifierModel make_model(const std::vector<LayerSpec>& architecture, LabelSet labels, Dims input,
                           unsigned long long seed) {
  infer_shapes(architecture, input);
  Rng rng(seed);
  std::vector<Layer> layers;
  int conv_idx = 0;
  int pool_idx = 0;
  int dense_idx = 0;
  auto fill = [&](Tensor& t, std::vector<int> shape, int fan_in) {
    t.shape = std::move(shape);
    t.values.assign(t.element_count(), 0.0);
    if (seed != 0) {
      const double sd = std::sqrt(2.0 / fan_in);
      for (double& v : t.values) v = sd * rng.normal();
    }
  };
  for (const auto& spec : architecture) {
    Layer l;
    l.spec = spec;
    std::visit(Overloaded{
                   [&](const layer::Conv& c) {
                     l.name = "conv" + std::to_string(++conv_idx);
                     fill(l.weight, {c.out_channels, c.in_channels, c.kernel, c.kernel},
                          c.in_channels * c.kernel * c.kernel);
                     l.bias.shape = {c.out_channels};
                     l.bias.values.assign(c.out_channels, 0.0);
                   },
                   [&](const layer::MaxPool&) { l.name = "pool" + std::to_string(++pool_idx); },
                   [&](const layer::Flatten&) { l.name = "flatten"; },
                   [&](const layer::Dense& d) {
                     l.name = "dense" + std::to_string(++dense_idx);
                     fill(l.weight, {d.out_features, d.in_features}, d.in_features);
                     l.bias.shape = {d.out_features};
                     l.bias.values.assign(d.out_features, 0.0);
                   },
                   [&](const layer::Softmax&) { l.name = "softmax"; },
               },
               spec);
    layers.push_back(std::move(l));
  }
  return ClassifierModel(input, std::move(labels), std::move(layers));
}

}  // namespace spotattack
