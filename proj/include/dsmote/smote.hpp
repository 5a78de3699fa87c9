#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dsmote/error.hpp"

namespace dsmote {

// N x D real matrix with one class id per row. Works the same on raw
// pixel vectors and on latent codes.
struct LabeledVectors {
  int dim = 0;
  std::vector<float> data;      // row-major
  std::vector<int32_t> labels;

  size_t count() const { return labels.size(); }
  const float* row(size_t i) const { return data.data() + i * static_cast<size_t>(dim); }
  float* row(size_t i) { return data.data() + i * static_cast<size_t>(dim); }
  void push_row(const float* v, int32_t label);
  void validate() const;
};

struct SmoteConfig {
  int k = 5;  // SMOTE convention
  std::map<int32_t, size_t> targets;  // desired per-class totals
  uint64_t seed = 0;
};

struct ClassNeighbors {
  std::vector<uint32_t> members;               // global indices, ascending
  std::vector<std::vector<uint32_t>> neighbors;  // global indices per member
};

// For each member of `class_id`, the k nearest other members by Euclidean
// distance (ties broken by lower index); k is clamped to class_size-1.
// Classes with fewer than two members are an error — the oversampler's
// singleton policy handles those before calling in.
ClassNeighbors knn_within_class(const LabeledVectors& data, int32_t class_id, int k);

// x + u * (neighbor - x), exactly.
std::vector<float> interpolate(const std::vector<float>& x,
                               const std::vector<float>& neighbor, double u);

// Returns only the synthetic rows: per class, target - current of them,
// each drawn by (uniform member, uniform neighbor among its k, uniform
// u in [0,1)). Classes run on independent RNG streams derived from the
// config seed. Singleton classes are replicated verbatim (with a warning
// on stderr).
LabeledVectors oversample(const LabeledVectors& data, const SmoteConfig& cfg);

}  // namespace dsmote
