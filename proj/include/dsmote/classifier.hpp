#pragma once

#include <cstdint>
#include <vector>

#include "dsmote/dataset.hpp"
#include "dsmote/network.hpp"

namespace dsmote {

struct ClassifierConfig {
  int epochs = 15;
  int batch_size = 64;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int hidden = 64;
  uint64_t seed = 0;
};

// Softmax cross-entropy training of the compact CNN (models.hpp) with
// Adam; deterministic under the seed.
Net train_classifier(const ImageDataset& train, const ClassifierConfig& cfg);

// Argmax predictions, eval mode.
std::vector<int32_t> predict(Net& clf, const ImageDataset& ds);

double accuracy(const std::vector<int32_t>& preds, const std::vector<int32_t>& labels);

}  // namespace dsmote
