#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsmote/dataset.hpp"

namespace dsmote {

// Deterministic MNIST-shaped fixture: ten digit-like glyphs rendered at
// 28x28 with translation jitter, intensity jitter and background noise.
// Classes share strokes, so skewed training genuinely hurts minority
// recall; used wherever the real datasets are not on disk.
ImageDataset make_glyph_dataset(const std::vector<size_t>& per_class_counts,
                                uint64_t seed, const std::string& provenance);

// Real-MNIST per-class training histogram (sums to 60000).
const std::vector<size_t>& mnist_like_train_counts();

// Writes train-images-idx3-ubyte / train-labels-idx1-ubyte and
// t10k-images-idx3-ubyte / t10k-labels-idx1-ubyte under `dir`. The train
// split mirrors the real MNIST histogram; the test split carries 1300 per
// class so a 1200-per-class balanced draw stays feasible.
void write_glyph_fixture(const std::string& dir, uint64_t seed);

}  // namespace dsmote
