#include "dsmote/models.hpp"

#include "dsmote/error.hpp"

namespace dsmote {

NetworkSpec encoder_spec(int in_channels, int image, int width, int latent_dim) {
  if (image % 16 != 0) throw ShapeError("encoder image size must be divisible by 16");
  NetworkSpec s;
  s.input_shape = {in_channels, image, image};
  int ch = in_channels;
  for (int i = 0; i < 4; ++i) {
    s.layers.push_back(LayerSpec::conv(ch, width, 4, 2, 1, /*bias=*/false));
    s.layers.push_back(LayerSpec::batchnorm(width));
    s.layers.push_back(LayerSpec::leaky(0.2f));
    ch = width;
  }
  const int spatial = image / 16;
  s.layers.push_back(LayerSpec::flatten_());
  s.layers.push_back(LayerSpec::linear_(width * spatial * spatial, latent_dim));
  return s;
}

NetworkSpec decoder_spec(int out_channels, int image, int width, int latent_dim) {
  if (image % 16 != 0) throw ShapeError("decoder image size must be divisible by 16");
  NetworkSpec s;
  s.input_shape = {latent_dim};
  const int spatial = image / 16;
  s.layers.push_back(LayerSpec::linear_(latent_dim, width * spatial * spatial));
  s.layers.push_back(LayerSpec::unflatten_(width, spatial, spatial));
  for (int i = 0; i < 3; ++i) {
    s.layers.push_back(LayerSpec::conv_transpose(width, width, 4, 2, 1, /*bias=*/false));
    s.layers.push_back(LayerSpec::batchnorm(width));
    s.layers.push_back(LayerSpec::relu_());
  }
  s.layers.push_back(LayerSpec::conv_transpose(width, out_channels, 4, 2, 1));
  s.layers.push_back(LayerSpec::tanh_());
  return s;
}

NetworkSpec classifier_spec(int in_channels, int image, int classes, int hidden) {
  if (image % 4 != 0) throw ShapeError("classifier image size must be divisible by 4");
  NetworkSpec s;
  s.input_shape = {in_channels, image, image};
  s.layers.push_back(LayerSpec::conv(in_channels, 16, 3, 1, 1));
  s.layers.push_back(LayerSpec::relu_());
  s.layers.push_back(LayerSpec::maxpool());
  s.layers.push_back(LayerSpec::conv(16, 32, 3, 1, 1));
  s.layers.push_back(LayerSpec::relu_());
  s.layers.push_back(LayerSpec::maxpool());
  s.layers.push_back(LayerSpec::flatten_());
  const int flat = 32 * (image / 4) * (image / 4);
  s.layers.push_back(LayerSpec::linear_(flat, hidden));
  s.layers.push_back(LayerSpec::relu_());
  s.layers.push_back(LayerSpec::linear_(hidden, classes));
  return s;
}

}  // namespace dsmote
