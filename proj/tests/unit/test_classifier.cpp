#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <numeric>

#include "spotattack/classifier.hpp"
#include "test_support.hpp"

namespace spotattack {
namespace {

using testing::fixture;
using testing::random_image;
using testing::scratch_dir;
using testing::slurp;

double sum(const ClassProbs& p) { return std::accumulate(p.values.begin(), p.values.end(), 0.0); }

TEST(LabelSet, StandardAndParse) {
  const LabelSet s = LabelSet::standard();
  ASSERT_EQ(s.size(), 16u);
  EXPECT_EQ(s[0], "A");
  EXPECT_EQ(s[5], "F");
  EXPECT_EQ(s[6], "0");
  EXPECT_EQ(s[15], "9");
  EXPECT_EQ(LabelSet::parse("A-F").names(), (std::vector<std::string>{"A", "B", "C", "D", "E", "F"}));
  EXPECT_EQ(LabelSet::parse("B,D").names(), (std::vector<std::string>{"B", "D"}));
  EXPECT_EQ(LabelSet::parse("A-F,0-9"), s);
  EXPECT_EQ(s.index_of("0"), 6u);
  EXPECT_THROW(s.index_of("Z"), UnknownLabel);
  EXPECT_THROW(LabelSet(std::vector<std::string>{"A", "A"}), InvalidArgument);
  EXPECT_THROW(LabelSet(std::vector<std::string>{}), InvalidArgument);
}

TEST(LabelOf, Examples) {
  const LabelSet abc(std::vector<std::string>{"A", "B", "C"});
  const auto onehot = label_of({{0.0, 0.0, 1.0}}, abc);
  EXPECT_EQ(onehot.label, "C");
  EXPECT_EQ(onehot.confidence, 1.0);
  const auto uniform = label_of({{1.0 / 3, 1.0 / 3, 1.0 / 3}}, abc);
  EXPECT_EQ(uniform.label, "A");
  EXPECT_EQ(uniform.index, 0u);
  EXPECT_DOUBLE_EQ(uniform.confidence, 1.0 / 3);
  const auto mid = label_of({{0.1, 0.7, 0.2}}, abc);
  EXPECT_EQ(mid.label, "B");
  EXPECT_DOUBLE_EQ(mid.confidence, 0.7);
  EXPECT_THROW(label_of({{0.5, 0.5}}, abc), DimensionMismatch);
}

TEST(Architecture, StandardShapes) {
  const auto arch = standard_architecture(16);
  ASSERT_EQ(arch.size(), 8u);
  const auto shapes = infer_shapes(arch, kCharDims);
  EXPECT_EQ(shapes[0], (ActivationShape{16, 60, 35}));
  EXPECT_EQ(shapes[1], (ActivationShape{16, 29, 17}));
  EXPECT_EQ(shapes[2], (ActivationShape{32, 29, 17}));
  EXPECT_EQ(shapes[3], (ActivationShape{32, 14, 8}));
  EXPECT_EQ(shapes[4], (ActivationShape{32, 14, 8}));
  EXPECT_EQ(shapes[5].size(), 3584);
  EXPECT_EQ(shapes[7].size(), 16);
  EXPECT_EQ(std::get<layer::Dense>(arch[6]).in_features, 3584);
}

TEST(Architecture, CompositionErrors) {
  std::vector<LayerSpec> bad{layer::Conv{4, 8}, layer::Flatten{}, layer::Dense{1, 2}, layer::Softmax{}};
  EXPECT_THROW(infer_shapes(bad, kCharDims), ShapeMismatch);
  std::vector<LayerSpec> no_flatten{layer::Dense{6300, 2}, layer::Softmax{}};
  EXPECT_THROW(infer_shapes(no_flatten, kCharDims), ShapeMismatch);
}

TEST(Predict, ZeroWeightsGiveUniform) {
  const auto model = make_model(standard_architecture(16), LabelSet::standard(), kCharDims, 0);
  Rng rng(4);
  const ClassProbs p = model.predict(random_image(kCharDims, rng));
  ASSERT_EQ(p.values.size(), 16u);
  for (double v : p.values) EXPECT_NEAR(v, 1.0 / 16, 1e-12);
}

TEST(Predict, ValidDeterministicProbabilities) {
  const auto model = make_model(standard_architecture(16), LabelSet::standard(), kCharDims, 17);
  Rng rng(11);
  for (int i = 0; i < 5; ++i) {
    const CharImage img = random_image(kCharDims, rng);
    const ClassProbs p = model.predict(img);
    EXPECT_NEAR(sum(p), 1.0, 1e-6);
    for (double v : p.values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(model.predict(img).values, p.values);
  }
  const ClassProbs extreme = model.predict(CharImage(kCharDims, 255.0));
  EXPECT_NEAR(sum(extreme), 1.0, 1e-6);
}

TEST(Predict, DimensionMismatch) {
  const auto model = make_model(standard_architecture(16), LabelSet::standard(), kCharDims, 1);
  EXPECT_THROW(model.predict(CharImage({35, 60})), DimensionMismatch);
}

TEST(Predict, SingleConvGolden) {
  const ClassifierModel model = load_model(fixture("single_conv_model.json"));
  const auto expected = nlohmann::json::parse(slurp(fixture("single_conv_expected.json")));
  const auto pixel = expected.at("pixel").get<std::vector<double>>();
  CharImage img(model.input_dims());
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      for (int ch = 0; ch < 3; ++ch) img.set(r, c, ch, pixel[ch]);
  const ClassProbs p = model.predict(img);
  const auto want = expected.at("probs").get<std::vector<double>>();
  ASSERT_EQ(p.values.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(p.values[i], want[i], 1e-6);
}

// Dense-only model over the flattened image checks the channel-major flatten order.
TEST(Predict, FlattenIsChannelMajor) {
  const Dims d{2, 2};
  std::vector<Layer> layers;
  Layer dense{"dense1", layer::Dense{12, 2}, {{2, 12}, std::vector<double>(24, 0.0)}, {{2}, {0.0, 0.0}}};
  dense.weight.values[12 + 4] = 255.0;  // class 1 reads channel 1, pixel (0, 0)
  layers.push_back({"flatten", layer::Flatten{}, {}, {}});
  layers.push_back(dense);
  layers.push_back({"softmax", layer::Softmax{}, {}, {}});
  const ClassifierModel model(d, LabelSet(std::vector<std::string>{"p", "q"}), layers);
  CharImage img(d);
  img.set(0, 0, 1, 0.02);
  const ClassProbs p = model.predict(img);
  EXPECT_NEAR(p.values[1], 1.0 / (1.0 + std::exp(-0.02)), 1e-12);
}

TEST(Confidence, MatchesPredict) {
  const auto model = make_model(standard_architecture(16), LabelSet::standard(), kCharDims, 3);
  Rng rng(12);
  const CharImage img = random_image(kCharDims, rng);
  const Prediction top = classify(model, img);
  EXPECT_EQ(confidence(model, img, top.label), top.confidence);
  double total = 0.0;
  for (const auto& l : model.labels().names()) total += confidence(model, img, l);
  EXPECT_NEAR(total, 1.0, 1e-6);
  EXPECT_THROW(confidence(model, img, "Z"), UnknownLabel);
}

TEST(ModelIo, StandardBundleRoundTrip) {
  const auto dir = scratch_dir("model_io");
  const auto model = make_model(standard_architecture(16), LabelSet::standard(), kCharDims, 21);
  save_model(model, dir / "m.json");
  const ClassifierModel back = load_model(dir / "m.json");
  EXPECT_EQ(back.labels().size(), 16u);
  Rng rng(13);
  for (int i = 0; i < 3; ++i) {
    const CharImage img = random_image(kCharDims, rng);
    EXPECT_EQ(back.predict(img).values, model.predict(img).values);
  }
  EXPECT_EQ(serialize_model(back), serialize_model(model));
  const auto doc = nlohmann::json::parse(slurp(dir / "m.json"));
  EXPECT_EQ(doc.at("format_version"), 1);
  EXPECT_EQ(doc.at("preprocessing"), "scale255");
  EXPECT_EQ(doc.at("layers").size(), 8u);
  EXPECT_EQ(doc.at("tensors").at("conv1.weight").size(), 16u);
  EXPECT_EQ(doc.at("tensors").at("conv1.weight")[0].size(), 3u);
  EXPECT_EQ(doc.at("tensors").at("dense1.weight")[0].size(), 3584u);
}

nlohmann::json single_conv_doc() { return nlohmann::json::parse(slurp(fixture("single_conv_model.json"))); }

TEST(ModelIo, DenseWeightOffByOne) {
  auto doc = single_conv_doc();
  doc["tensors"]["dense1.weight"][0].push_back(0.0);
  EXPECT_THROW(parse_model(doc.dump()), ShapeMismatch);
  auto doc2 = single_conv_doc();
  doc2["layers"][2]["weight_shapes"]["dense1.weight"] = {3, 13};
  EXPECT_THROW(parse_model(doc2.dump()), ShapeMismatch);
}

TEST(ModelIo, UnknownLayerKind) {
  auto doc = single_conv_doc();
  doc["layers"][1]["kind"] = "dropout";
  EXPECT_THROW(parse_model(doc.dump()), UnknownLayerKind);
}

TEST(ModelIo, ParseErrors) {
  EXPECT_THROW(parse_model("{not json"), ParseError);
  EXPECT_THROW(parse_model("[]"), ParseError);
  auto doc = single_conv_doc();
  doc["format_version"] = 2;
  EXPECT_THROW(parse_model(doc.dump()), ParseError);
  auto doc2 = single_conv_doc();
  doc2["tensors"].erase("conv1.bias");
  EXPECT_THROW(parse_model(doc2.dump()), ParseError);
  auto doc3 = single_conv_doc();
  doc3["layers"].erase(3);
  EXPECT_THROW(parse_model(doc3.dump()), ShapeMismatch);
  auto doc4 = single_conv_doc();
  doc4["labels"] = {"X", "Y"};
  EXPECT_THROW(parse_model(doc4.dump()), ShapeMismatch);
  EXPECT_THROW(load_model("/nonexistent/model.json"), IoError);
}

TEST(ModelIo, FullPrecisionNumbers) {
  auto doc = single_conv_doc();
  doc["tensors"]["dense1.bias"][0] = 0.1234567890123456789;
  const ClassifierModel m = parse_model(doc.dump());
  EXPECT_EQ(m.layers()[2].bias.values[0], 0.1234567890123456789);
}

}  // namespace
}  // namespace spotattack
