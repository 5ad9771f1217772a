#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spotattack/classifier.hpp"

namespace spotattack {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const char* activation_name(Activation a) { return a == Activation::Relu ? "relu" : "none"; }

Activation parse_activation(const json& params) {
  const std::string name = params.value("activation", std::string("none"));
  if (name == "relu") return Activation::Relu;
  if (name == "none" || name == "linear") return Activation::None;
  throw ParseError("unknown activation '" + name + "'");
}

// Row-major flattening of nested arrays; the shape is inferred from the nesting and
// must be rectangular.
void flatten_nested(const json& node, std::size_t depth, std::vector<int>& shape,
                    std::vector<double>& out, const std::string& name) {
  if (node.is_number()) {
    if (depth != shape.size()) throw ShapeMismatch("tensor '" + name + "' is ragged");
    out.push_back(node.get<double>());
    return;
  }
  if (!node.is_array()) throw ParseError("tensor '" + name + "' contains a non-numeric entry");
  if (depth == shape.size()) {
    if (!out.empty()) throw ShapeMismatch("tensor '" + name + "' is ragged");
    shape.push_back(static_cast<int>(node.size()));
  } else if (depth > shape.size() || shape[depth] != static_cast<int>(node.size())) {
    throw ShapeMismatch("tensor '" + name + "' is ragged");
  }
  for (const auto& child : node) flatten_nested(child, depth + 1, shape, out, name);
}

json nest(const Tensor& t, std::size_t dim, std::size_t& offset) {
  json arr = json::array();
  if (dim + 1 == t.shape.size()) {
    for (int i = 0; i < t.shape[dim]; ++i) arr.push_back(t.values[offset++]);
    return arr;
  }
  for (int i = 0; i < t.shape[dim]; ++i) arr.push_back(nest(t, dim + 1, offset));
  return arr;
}

Tensor read_tensor(const json& tensors, const std::string& name, const json& declared_shape) {
  if (!tensors.contains(name)) throw ParseError("missing tensor '" + name + "'");
  Tensor t;
  std::vector<int> inferred;
  flatten_nested(tensors.at(name), 0, inferred, t.values, name);
  t.shape = inferred;
  if (!declared_shape.is_null()) {
    const auto declared = declared_shape.get<std::vector<int>>();
    if (declared != inferred) {
      throw ShapeMismatch("tensor '" + name + "' does not match its declared shape");
    }
  }
  return t;
}

int get_int(const json& params, const char* key, const std::string& layer) {
  if (!params.contains(key) || !params.at(key).is_number_integer()) {
    throw ParseError("layer '" + layer + "': missing integer param '" + key + "'");
  }
  return params.at(key).get<int>();
}

}  // namespace

ClassifierModel parse_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model bundle: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw ParseError("model bundle must be a JSON object");
    if (doc.value("format_version", -1) != kFormatVersion) {
      throw ParseError("unsupported format_version");
    }
    const std::string prep = doc.value("preprocessing", std::string(ClassifierModel::kPreprocessing));
    if (prep != ClassifierModel::kPreprocessing) {
      throw ParseError("unsupported preprocessing '" + prep + "'");
    }
    LabelSet labels(doc.at("labels").get<std::vector<std::string>>());

    Dims input = kCharDims;
    if (doc.contains("input")) {
      const auto& in = doc.at("input");
      input = {in.at("height").get<int>(), in.at("width").get<int>()};
      if (in.value("channels", CharImage::kChannels) != CharImage::kChannels) {
        throw ShapeMismatch("only 3-channel inputs are supported");
      }
    }

    const json& tensors = doc.at("tensors");
    std::vector<Layer> layers;
    for (const auto& jl : doc.at("layers")) {
      Layer l;
      const std::string kind = jl.at("kind").get<std::string>();
      l.name = jl.value("name", kind + std::to_string(layers.size()));
      const json params = jl.value("params", json::object());
      const json shapes = jl.value("weight_shapes", json::object());
      auto tensor = [&](const char* suffix) {
        const std::string key = l.name + "." + suffix;
        return read_tensor(tensors, key, shapes.contains(key) ? shapes.at(key) : json());
      };
      if (kind == "conv") {
        layer::Conv c;
        c.in_channels = get_int(params, "in_channels", l.name);
        c.out_channels = get_int(params, "out_channels", l.name);
        c.kernel = get_int(params, "kernel", l.name);
        c.padding = get_int(params, "padding", l.name);
        c.activation = parse_activation(params);
        l.spec = c;
        l.weight = tensor("weight");
        l.bias = tensor("bias");
      } else if (kind == "maxpool") {
        l.spec = layer::MaxPool{get_int(params, "window", l.name), get_int(params, "stride", l.name)};
      } else if (kind == "flatten") {
        l.spec = layer::Flatten{};
      } else if (kind == "dense") {
        layer::Dense d;
        d.in_features = get_int(params, "in_features", l.name);
        d.out_features = get_int(params, "out_features", l.name);
        d.activation = parse_activation(params);
        l.spec = d;
        l.weight = tensor("weight");
        l.bias = tensor("bias");
      } else if (kind == "softmax") {
        l.spec = layer::Softmax{};
      } else {
        throw UnknownLayerKind("unknown layer kind '" + kind + "'");
      }
      layers.push_back(std::move(l));
    }
    return ClassifierModel(input, std::move(labels), std::move(layers));
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid model bundle: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid model bundle: ") + e.what());
  }
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_model(ss.str());
}

std::string serialize_model(const ClassifierModel& model) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["labels"] = model.labels().names();
  doc["preprocessing"] = ClassifierModel::kPreprocessing;
  doc["input"] = {{"height", model.input_dims().height},
                  {"width", model.input_dims().width},
                  {"channels", CharImage::kChannels}};
  json layers = json::array();
  json tensors = json::object();
  for (const auto& l : model.layers()) {
    json jl;
    jl["name"] = l.name;
    json shapes = json::object();
    auto put = [&](const Tensor& t, const char* suffix) {
      const std::string key = l.name + "." + suffix;
      shapes[key] = t.shape;
      std::size_t offset = 0;
      tensors[key] = nest(t, 0, offset);
    };
    std::visit(Overloaded{
                   [&](const layer::Conv& c) {
                     jl["kind"] = "conv";
                     jl["params"] = {{"in_channels", c.in_channels},
                                     {"out_channels", c.out_channels},
                                     {"kernel", c.kernel},
                                     {"padding", c.padding},
                                     {"activation", activation_name(c.activation)}};
                     put(l.weight, "weight");
                     put(l.bias, "bias");
                   },
                   [&](const layer::MaxPool& p) {
                     jl["kind"] = "maxpool";
                     jl["params"] = {{"window", p.window}, {"stride", p.stride}};
                   },
                   [&](const layer::Flatten&) {
                     jl["kind"] = "flatten";
                     jl["params"] = json::object();
                   },
                   [&](const layer::Dense& d) {
                     jl["kind"] = "dense";
                     jl["params"] = {{"in_features", d.in_features},
                                     {"out_features", d.out_features},
                                     {"activation", activation_name(d.activation)}};
                     put(l.weight, "weight");
                     put(l.bias, "bias");
                   },
                   [&](const layer::Softmax&) {
                     jl["kind"] = "softmax";
                     jl["params"] = json::object();
                   },
               },
               l.spec);
    jl["weight_shapes"] = shapes;
    layers.push_back(std::move(jl));
  }
  doc["layers"] = std::move(layers);
  doc["tensors"] = std::move(tensors);
  return doc.dump() + "\n";
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << serialize_model(model);
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace spotattack
