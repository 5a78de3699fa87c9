#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsmote/dataset.hpp"
#include "dsmote/network.hpp"
#include "dsmote/smote.hpp"

namespace dsmote {

// Encoded feature vectors with their class labels; what SMOTE
// interpolates over.
struct LatentBatch {
  int latent_dim = 0;
  std::vector<float> codes;  // N x latent_dim, row-major
  std::vector<int32_t> labels;

  size_t count() const { return labels.size(); }
  LabeledVectors as_labeled_vectors() const;
};

struct GenerationPlan {
  // Synthetic instances to add per class. Empty = balance every class up
  // to the majority count.
  std::vector<size_t> synthetic_counts;
  int k = 5;
  uint64_t seed = 0;
};

// Index ranges of the synthetic block appended per class.
struct SyntheticRange {
  int32_t class_id = 0;
  size_t start = 0;
  size_t count = 0;
};

struct GenerationResult {
  ImageDataset dataset;  // originals (bit-identical, in order) + synthetics
  std::vector<SyntheticRange> ranges;
};

// Eval-mode encoding of every image; labels carried through.
LatentBatch encode_dataset(Net& encoder, const ImageDataset& ds);

// Encode -> latent SMOTE -> decode -> clip to [-1,1] -> de-normalize.
// Synthetic images are appended after the originals, grouped by class id.
GenerationResult generate_balanced(Net& encoder, Net& decoder, const ImageDataset& ds,
                                   const GenerationPlan& plan);

// Writes the augmented dataset as an IDX pair plus a JSON sidecar marking
// the synthetic index ranges.
void export_augmented(const GenerationResult& gen, const std::string& images_path,
                      const std::string& labels_path, const std::string& sidecar_path);

// 8-bit PNG grid with a 2-pixel border and 2-pixel separators; images are
// taken in order from `ds` starting at `first`.
void export_image_grid(const ImageDataset& ds, size_t first, int rows, int cols,
                       const std::string& path);

}  // namespace dsmote
