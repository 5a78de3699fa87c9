#pragma once

#include "dsmote/layers.hpp"

namespace dsmote {

// DCGAN-style stacks: four stride-2 conv (or mirrored transpose) layers
// with batch norm, LeakyReLU 0.2 on the way down, ReLU on the way up and
// Tanh at the output. `image` must be divisible by 16 so the spatial
// chain halves cleanly four times (32 -> 16 -> 8 -> 4 -> 2).
NetworkSpec encoder_spec(int in_channels, int image, int width, int latent_dim);
NetworkSpec decoder_spec(int out_channels, int image, int width, int latent_dim);

// Compact CNN used as the evaluation classifier: two conv+maxpool stages
// (16 and 32 channels) and two linear layers.
NetworkSpec classifier_spec(int in_channels, int image, int classes, int hidden);

}  // namespace dsmote
