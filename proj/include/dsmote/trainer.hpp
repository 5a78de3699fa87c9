#pragma once

#include <cstdint>
#include <vector>

#include "dsmote/dataset.hpp"
#include "dsmote/network.hpp"

namespace dsmote {

enum class PenaltyPermutation {
  shift1,    // circular shift by one: image i scored against peer i+1
  random,    // uniformly random permutation
  identity,  // test hook; penalty degenerates to reconstruction
};

struct TrainConfig {
  int latent_dim = 300;
  double lr = 0.0002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 64;
  int epochs = 100;
  double penalty_weight = 1.0;
  uint64_t seed = 0;
  int width = 64;  // conv channel width ("hidden layer dimensions")
  PenaltyPermutation permutation = PenaltyPermutation::shift1;
  // Plateau stop: relative epoch-loss improvement below `plateau_rel` for
  // `plateau_patience` consecutive epochs.
  double plateau_rel = 1e-4;
  int plateau_patience = 10;

  void validate() const;
};

struct LossRecord {
  int epoch = 0;
  double recon = 0.0;
  double penalty = 0.0;
  double total = 0.0;  // mean over batches of recon + w * penalty
};

struct StepResult {
  double loss = 0.0;
  GradStore enc_grads, dec_grads;
};

// MSE(decode(encode(batch)), batch) with gradients for both stacks.
// The batch is mixed-class, straight from the imbalanced training set.
StepResult reconstruction_step(Net& enc, Net& dec, const Tensor& batch);

// Same-class batch: embeddings are permuted before decoding and the
// decodes are scored against the *original* images, so each image is
// reconstructed from its class peer's embedding.
StepResult penalty_step(Net& enc, Net& dec, const Tensor& class_batch,
                        const std::vector<int32_t>& labels, PenaltyPermutation perm,
                        Rng& rng);

struct TrainResult {
  Net encoder, decoder;
  std::vector<LossRecord> history;
  // Which class fed each penalty batch, in draw order (empty when
  // penalty_weight is 0).
  std::vector<int32_t> penalty_class_draws;
};

// End-to-end training: per mixed batch one reconstruction pass plus one
// same-class penalty pass (class drawn uniformly, batch drawn with
// replacement when the class is small), combined into a single Adam step.
TrainResult train(const NetworkSpec& enc_spec, const NetworkSpec& dec_spec,
                  const ImageDataset& ds, const TrainConfig& cfg);

}  // namespace dsmote
