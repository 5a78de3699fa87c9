#pragma once

#include <string>
#include <vector>

#include "dsmote/error.hpp"

namespace dsmote {

// The fixed layer vocabulary of the engine. maxpool2d is not part of the
// autoencoder stacks; the evaluation classifier needs it.
enum class LayerKind {
  conv2d,
  conv2d_transpose,
  batchnorm2d,
  leaky_relu,
  relu,
  tanh,
  flatten,
  unflatten,
  linear,
  maxpool2d,
};

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;

  // conv2d / conv2d_transpose; `bias` is false for convolutions feeding a
  // batch norm (the shift would be normalized away).
  int in_ch = 0, out_ch = 0, kernel = 1, stride = 1, pad = 0;
  bool bias = true;
  // leaky_relu
  float slope = 0.2f;
  // batchnorm2d
  int features = 0;
  // linear
  int in_features = 0, out_features = 0;
  // unflatten target
  int channels = 0, height = 0, width = 0;

  static LayerSpec conv(int in_ch, int out_ch, int kernel, int stride, int pad,
                        bool bias = true);
  static LayerSpec conv_transpose(int in_ch, int out_ch, int kernel, int stride, int pad,
                                  bool bias = true);
  static LayerSpec batchnorm(int features);
  static LayerSpec leaky(float slope = 0.2f);
  static LayerSpec relu_();
  static LayerSpec tanh_();
  static LayerSpec flatten_();
  static LayerSpec unflatten_(int channels, int height, int width);
  static LayerSpec linear_(int in_features, int out_features);
  static LayerSpec maxpool();
};

// Ordered layer stack plus its declared input shape (without the batch
// dimension: {C,H,W} for images, {F} once flattened).
struct NetworkSpec {
  std::vector<LayerSpec> layers;
  std::vector<int> input_shape;

  // Validates hyperparameters and propagates shapes through the stack.
  // Returns the per-layer output shapes; throws ShapeError naming the
  // offending layer otherwise.
  std::vector<std::vector<int>> type_check() const;

  std::vector<int> output_shape() const;

  std::string to_json() const;
  static NetworkSpec from_json(const std::string& text);
};

// Activation shape transition for a single layer.
std::vector<int> layer_output_shape(const LayerSpec& l, const std::vector<int>& in,
                                    int layer_index);

}  // namespace dsmote
