#include "dsmote/layers.hpp"

#include <json.hpp>

#include "dsmote/tensor.hpp"

namespace dsmote {

namespace {
using nlohmann::json;

struct KindName {
  LayerKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {LayerKind::conv2d, "conv2d"},
    {LayerKind::conv2d_transpose, "conv2d_transpose"},
    {LayerKind::batchnorm2d, "batchnorm2d"},
    {LayerKind::leaky_relu, "leaky_relu"},
    {LayerKind::relu, "relu"},
    {LayerKind::tanh, "tanh"},
    {LayerKind::flatten, "flatten"},
    {LayerKind::unflatten, "unflatten"},
    {LayerKind::linear, "linear"},
    {LayerKind::maxpool2d, "maxpool2d"},
};

std::string where(int idx, const LayerSpec& l) {
  return "layer " + std::to_string(idx) + " (" + layer_kind_name(l.kind) + ")";
}
}  // namespace

const char* layer_kind_name(LayerKind k) {
  for (const auto& kn : kKindNames)
    if (kn.kind == k) return kn.name;
  return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
  for (const auto& kn : kKindNames)
    if (name == kn.name) return kn.kind;
  throw ShapeError("unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::conv(int in_ch, int out_ch, int kernel, int stride, int pad,
                          bool bias) {
  LayerSpec l;
  l.kind = LayerKind::conv2d;
  l.in_ch = in_ch;
  l.out_ch = out_ch;
  l.kernel = kernel;
  l.stride = stride;
  l.pad = pad;
  l.bias = bias;
  return l;
}

LayerSpec LayerSpec::conv_transpose(int in_ch, int out_ch, int kernel, int stride,
                                    int pad, bool bias) {
  LayerSpec l = conv(in_ch, out_ch, kernel, stride, pad, bias);
  l.kind = LayerKind::conv2d_transpose;
  return l;
}

LayerSpec LayerSpec::batchnorm(int features) {
  LayerSpec l;
  l.kind = LayerKind::batchnorm2d;
  l.features = features;
  return l;
}

LayerSpec LayerSpec::leaky(float slope) {
  LayerSpec l;
  l.kind = LayerKind::leaky_relu;
  l.slope = slope;
  return l;
}

LayerSpec LayerSpec::relu_() {
  LayerSpec l;
  l.kind = LayerKind::relu;
  return l;
}

LayerSpec LayerSpec::tanh_() {
  LayerSpec l;
  l.kind = LayerKind::tanh;
  return l;
}

LayerSpec LayerSpec::flatten_() {
  LayerSpec l;
  l.kind = LayerKind::flatten;
  return l;
}

LayerSpec LayerSpec::unflatten_(int channels, int height, int width) {
  LayerSpec l;
  l.kind = LayerKind::unflatten;
  l.channels = channels;
  l.height = height;
  l.width = width;
  return l;
}

LayerSpec LayerSpec::linear_(int in_features, int out_features) {
  LayerSpec l;
  l.kind = LayerKind::linear;
  l.in_features = in_features;
  l.out_features = out_features;
  return l;
}

LayerSpec LayerSpec::maxpool() {
  LayerSpec l;
  l.kind = LayerKind::maxpool2d;
  l.kernel = 2;
  l.stride = 2;
  return l;
}

std::vector<int> layer_output_shape(const LayerSpec& l, const std::vector<int>& in,
                                    int idx) {
  auto expect_chw = [&]() {
    if (in.size() != 3)
      throw ShapeError(where(idx, l) + ": expected CxHxW input, got " +
                       Tensor::shape_str(in));
  };
  switch (l.kind) {
    case LayerKind::conv2d: {
      expect_chw();
      if (l.kernel < 1 || l.stride < 1 || l.pad < 0 || l.in_ch < 1 || l.out_ch < 1)
        throw ShapeError(where(idx, l) + ": invalid hyperparameters");
      if (in[0] != l.in_ch)
        throw ShapeError(where(idx, l) + ": expected " + std::to_string(l.in_ch) +
                         " input channels, got " + std::to_string(in[0]));
      const int oh = (in[1] + 2 * l.pad - l.kernel) / l.stride + 1;
      const int ow = (in[2] + 2 * l.pad - l.kernel) / l.stride + 1;
      if (in[1] + 2 * l.pad < l.kernel || in[2] + 2 * l.pad < l.kernel || oh < 1 || ow < 1)
        throw ShapeError(where(idx, l) + ": kernel larger than padded input");
      return {l.out_ch, oh, ow};
    }
    case LayerKind::conv2d_transpose: {
      expect_chw();
      if (l.kernel < 1 || l.stride < 1 || l.pad < 0 || l.in_ch < 1 || l.out_ch < 1)
        throw ShapeError(where(idx, l) + ": invalid hyperparameters");
      if (in[0] != l.in_ch)
        throw ShapeError(where(idx, l) + ": expected " + std::to_string(l.in_ch) +
                         " input channels, got " + std::to_string(in[0]));
      const int oh = (in[1] - 1) * l.stride - 2 * l.pad + l.kernel;
      const int ow = (in[2] - 1) * l.stride - 2 * l.pad + l.kernel;
      if (oh < 1 || ow < 1)
        throw ShapeError(where(idx, l) + ": non-positive output size");
      return {l.out_ch, oh, ow};
    }
    case LayerKind::batchnorm2d: {
      expect_chw();
      if (l.features < 1) throw ShapeError(where(idx, l) + ": invalid feature count");
      if (in[0] != l.features)
        throw ShapeError(where(idx, l) + ": expected " + std::to_string(l.features) +
                         " channels, got " + std::to_string(in[0]));
      return in;
    }
    case LayerKind::leaky_relu:
    case LayerKind::relu:
    case LayerKind::tanh:
      return in;
    case LayerKind::flatten: {
      int f = 1;
      for (int d : in) f *= d;
      return {f};
    }
    case LayerKind::unflatten: {
      if (in.size() != 1)
        throw ShapeError(where(idx, l) + ": expected flat input, got " +
                         Tensor::shape_str(in));
      if (l.channels < 1 || l.height < 1 || l.width < 1)
        throw ShapeError(where(idx, l) + ": invalid target shape");
      if (in[0] != l.channels * l.height * l.width)
        throw ShapeError(where(idx, l) + ": cannot unflatten " + std::to_string(in[0]) +
                         " features to " + Tensor::shape_str({l.channels, l.height, l.width}));
      return {l.channels, l.height, l.width};
    }
    case LayerKind::linear: {
      if (in.size() != 1)
        throw ShapeError(where(idx, l) + ": expected flat input, got " +
                         Tensor::shape_str(in));
      if (l.in_features < 1 || l.out_features < 1)
        throw ShapeError(where(idx, l) + ": invalid feature counts");
      if (in[0] != l.in_features)
        throw ShapeError(where(idx, l) + ": expected " + std::to_string(l.in_features) +
                         " features, got " + std::to_string(in[0]));
      return {l.out_features};
    }
    case LayerKind::maxpool2d: {
      expect_chw();
      if (in[1] % 2 != 0 || in[2] % 2 != 0)
        throw ShapeError(where(idx, l) + ": input spatial size must be even");
      return {in[0], in[1] / 2, in[2] / 2};
    }
  }
  throw ShapeError(where(idx, l) + ": unhandled layer kind");
}

std::vector<std::vector<int>> NetworkSpec::type_check() const {
  if (input_shape.empty()) throw ShapeError("network has no declared input shape");
  std::vector<std::vector<int>> shapes;
  shapes.reserve(layers.size());
  std::vector<int> cur = input_shape;
  for (size_t i = 0; i < layers.size(); ++i) {
    cur = layer_output_shape(layers[i], cur, static_cast<int>(i));
    shapes.push_back(cur);
  }
  return shapes;
}

std::vector<int> NetworkSpec::output_shape() const {
  auto shapes = type_check();
  return shapes.empty() ? input_shape : shapes.back();
}

std::string NetworkSpec::to_json() const {
  json j;
  j["input_shape"] = input_shape;
  json arr = json::array();
  for (const auto& l : layers) {
    json e;
    e["kind"] = layer_kind_name(l.kind);
    switch (l.kind) {
      case LayerKind::conv2d:
      case LayerKind::conv2d_transpose:
        e["in_ch"] = l.in_ch;
        e["out_ch"] = l.out_ch;
        e["kernel"] = l.kernel;
        e["stride"] = l.stride;
        e["pad"] = l.pad;
        e["bias"] = l.bias;
        break;
      case LayerKind::batchnorm2d:
        e["features"] = l.features;
        break;
      case LayerKind::leaky_relu:
        e["slope"] = l.slope;
        break;
      case LayerKind::unflatten:
        e["channels"] = l.channels;
        e["height"] = l.height;
        e["width"] = l.width;
        break;
      case LayerKind::linear:
        e["in_features"] = l.in_features;
        e["out_features"] = l.out_features;
        break;
      default:
        break;
    }
    arr.push_back(e);
  }
  j["layers"] = arr;
  return j.dump(2);
}

NetworkSpec NetworkSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("network spec: invalid JSON: ") + e.what());
  }
  NetworkSpec spec;
  try {
    spec.input_shape = j.at("input_shape").get<std::vector<int>>();
    for (const auto& e : j.at("layers")) {
      LayerSpec l;
      l.kind = layer_kind_from_name(e.at("kind").get<std::string>());
      switch (l.kind) {
        case LayerKind::conv2d:
        case LayerKind::conv2d_transpose:
          l.in_ch = e.at("in_ch").get<int>();
          l.out_ch = e.at("out_ch").get<int>();
          l.kernel = e.at("kernel").get<int>();
          l.stride = e.at("stride").get<int>();
          l.pad = e.at("pad").get<int>();
          l.bias = e.value("bias", true);
          break;
        case LayerKind::batchnorm2d:
          l.features = e.at("features").get<int>();
          break;
        case LayerKind::leaky_relu:
          l.slope = e.at("slope").get<float>();
          break;
        case LayerKind::unflatten:
          l.channels = e.at("channels").get<int>();
          l.height = e.at("height").get<int>();
          l.width = e.at("width").get<int>();
          break;
        case LayerKind::linear:
          l.in_features = e.at("in_features").get<int>();
          l.out_features = e.at("out_features").get<int>();
          break;
        case LayerKind::maxpool2d:
          l.kernel = 2;
          l.stride = 2;
          break;
        default:
          break;
      }
      spec.layers.push_back(l);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("network spec: missing or ill-typed field: ") + e.what());
  }
  return spec;
}

}  // namespace dsmote
