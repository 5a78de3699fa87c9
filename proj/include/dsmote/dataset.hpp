#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsmote/tensor.hpp"

namespace dsmote {

// Labeled 8-bit image collection, immutable once built. `provenance`
// tracks which split an instance set descends from so experiments can
// assert that training never touches test data.
struct ImageDataset {
  int channels = 1, height = 0, width = 0;
  std::vector<uint8_t> pixels;  // N*C*H*W
  std::vector<int32_t> labels;
  int class_count = 10;
  std::string provenance;

  size_t size() const { return labels.size(); }
  size_t image_bytes() const {
    return static_cast<size_t>(channels) * height * width;
  }
  const uint8_t* image(size_t i) const { return pixels.data() + i * image_bytes(); }
  std::vector<size_t> histogram() const;
  void validate() const;
};

// Per-class retained counts driving skew injection. `class_order` maps
// profile position -> class id (identity by default), so a descending
// Table-style profile can be pointed at arbitrary class labels.
struct ImbalanceProfile {
  std::vector<size_t> counts;
  std::vector<int32_t> class_order;  // empty = identity
  uint64_t seed = 0;

  std::string to_json() const;
  static ImbalanceProfile from_json(const std::string& text);
};

struct FoldAssignment {
  std::vector<int32_t> fold_of;  // per instance
  int fold_count = 0;

  std::string to_json() const;
  static FoldAssignment from_json(const std::string& text);
};

// IDX (MNIST container) ingestion. Paths ending in ".gz" are
// transparently decompressed. Image magic 0x00000803, label magic
// 0x00000801; parse failures report the byte offset.
ImageDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Writes an uncompressed IDX pair.
void save_idx(const ImageDataset& ds, const std::string& images_path,
              const std::string& labels_path);

// Uniform sampling without replacement down to profile counts; the output
// order is itself deterministically shuffled.
ImageDataset apply_imbalance(const ImageDataset& ds, const ImbalanceProfile& profile);

// Two independently sampled test sets matching the requested histograms.
std::pair<ImageDataset, ImageDataset> build_test_sets(
    const ImageDataset& ds_test, const std::vector<size_t>& balanced_counts,
    const std::vector<size_t>& imbalanced_counts, uint64_t seed);

// Stratified k-fold assignment; every class must have >= k members.
FoldAssignment make_folds(const ImageDataset& ds, int k, uint64_t seed);

// Subset by instance indices (order preserved).
ImageDataset take_subset(const ImageDataset& ds, const std::vector<uint32_t>& indices);

constexpr int kNetImage = 32;  // every network sees 32x32 inputs

// Pixels map linearly [0,255] -> [-1,1]; images smaller than 32x32 are
// centered on a -1 (black) canvas.
Tensor normalize(const ImageDataset& ds);
Tensor normalize_subset(const ImageDataset& ds, const std::vector<uint32_t>& indices);

// Inverse of normalize for one image: crop the centered region back to
// (h, w) and map to 8-bit with round-to-nearest.
std::vector<uint8_t> denormalize_image(const float* net_image, int channels, int h,
                                       int w);

// Desk-scale profile rule: full-scale counts / 10, floored, minimum 4.
std::vector<size_t> desk_counts(const std::vector<size_t>& full);

// Table-style MNIST profiles used throughout the experiments.
const std::vector<size_t>& mnist_train_profile();     // 100:1, majority 4000
const std::vector<size_t>& mnist_balanced_test();     // 1200 each
const std::vector<size_t>& mnist_imbalanced_test();   // mirrors the train skew

}  // namespace dsmote
