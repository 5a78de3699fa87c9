#include "dsmote/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsmote/error.hpp"

namespace dsmote {

void TrainConfig::validate() const {
  if (latent_dim < 1) throw ConfigError("train.latent_dim", "must be >= 1");
  if (lr <= 0.0) throw ConfigError("train.lr", "must be > 0");
  if (batch_size < 2) throw ConfigError("train.batch_size", "must be >= 2");
  if (epochs < 1) throw ConfigError("train.epochs", "must be >= 1");
  if (penalty_weight < 0.0) throw ConfigError("train.penalty_weight", "must be >= 0");
  if (width < 1) throw ConfigError("train.width", "must be >= 1");
}

StepResult reconstruction_step(Net& enc, Net& dec, const Tensor& batch) {
  StepResult r;
  ForwardCache enc_cache, dec_cache;
  Tensor codes = forward(enc.spec, enc.params, batch, Mode::train, &enc_cache);
  Tensor recon = forward(dec.spec, dec.params, codes, Mode::train, &dec_cache);
  auto [loss, grad] = mse_loss(recon, batch);
  if (!std::isfinite(loss)) throw NumericError("reconstruction loss is not finite");
  r.loss = loss;
  r.enc_grads = GradStore::zeros_like(enc.params);
  r.dec_grads = GradStore::zeros_like(dec.params);
  Tensor grad_codes = backward(dec.spec, dec.params, dec_cache, grad, r.dec_grads);
  backward(enc.spec, enc.params, enc_cache, grad_codes, r.enc_grads);
  return r;
}

StepResult penalty_step(Net& enc, Net& dec, const Tensor& class_batch,
                        const std::vector<int32_t>& labels, PenaltyPermutation perm,
                        Rng& rng) {
  const int n = class_batch.shape.at(0);
  if (n < 2) throw DataError("penalty_step: batch must have >= 2 images");
  if (static_cast<int>(labels.size()) != n)
    throw DataError("penalty_step: label count does not match batch");
  for (int32_t l : labels)
    if (l != labels[0])
      throw DataError("penalty_step: batch mixes classes " + std::to_string(labels[0]) +
                      " and " + std::to_string(l));

  StepResult r;
  ForwardCache enc_cache, dec_cache;
  Tensor codes = forward(enc.spec, enc.params, class_batch, Mode::train, &enc_cache);

  // dest[i] decodes the embedding of source permute[i].
  std::vector<uint32_t> src(n);
  switch (perm) {
    case PenaltyPermutation::shift1:
      for (int i = 0; i < n; ++i) src[i] = static_cast<uint32_t>((i + 1) % n);
      break;
    case PenaltyPermutation::random: {
      auto p = rng.permutation(n);
      src.assign(p.begin(), p.end());
      break;
    }
    case PenaltyPermutation::identity:
      for (int i = 0; i < n; ++i) src[i] = static_cast<uint32_t>(i);
      break;
  }

  const int d = codes.shape.at(1);
  Tensor permuted(codes.shape);
  for (int i = 0; i < n; ++i)
    std::copy_n(codes.ptr() + static_cast<size_t>(src[i]) * d, d,
                permuted.ptr() + static_cast<size_t>(i) * d);

  ForwardCache dec_cache2;
  Tensor decoded = forward(dec.spec, dec.params, permuted, Mode::train, &dec_cache2);
  auto [loss, grad] = mse_loss(decoded, class_batch);
  if (!std::isfinite(loss)) throw NumericError("penalty loss is not finite");
  r.loss = loss;
  r.enc_grads = GradStore::zeros_like(enc.params);
  r.dec_grads = GradStore::zeros_like(dec.params);
  Tensor grad_permuted = backward(dec.spec, dec.params, dec_cache2, grad, r.dec_grads);

  // Route gradients back through the inverse permutation.
  Tensor grad_codes(codes.shape);
  for (int i = 0; i < n; ++i)
    std::copy_n(grad_permuted.ptr() + static_cast<size_t>(i) * d, d,
                grad_codes.ptr() + static_cast<size_t>(src[i]) * d);
  backward(enc.spec, enc.params, enc_cache, grad_codes, r.enc_grads);
  return r;
}

TrainResult train(const NetworkSpec& enc_spec, const NetworkSpec& dec_spec,
                  const ImageDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  ds.validate();

  TrainResult result;
  result.encoder.spec = enc_spec;
  result.decoder.spec = dec_spec;
  {
    Rng init_rng = derive_rng(cfg.seed, "train.init");
    result.encoder.params = init_params(enc_spec, init_rng);
    result.decoder.params = init_params(dec_spec, init_rng);
  }
  Net& enc = result.encoder;
  Net& dec = result.decoder;

  std::vector<std::vector<uint32_t>> per_class(ds.class_count);
  for (size_t i = 0; i < ds.size(); ++i)
    per_class[ds.labels[i]].push_back(static_cast<uint32_t>(i));
  std::vector<int32_t> classes_present;
  for (int c = 0; c < ds.class_count; ++c)
    if (!per_class[c].empty()) classes_present.push_back(c);
  if (classes_present.empty()) throw DataError("train: dataset has no instances");

  std::vector<uint32_t> order(ds.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<uint32_t>(i);

  Rng shuffle_rng = derive_rng(cfg.seed, "train.shuffle");
  Rng penalty_rng = derive_rng(cfg.seed, "train.penalty");

  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double sum_recon = 0.0, sum_pen = 0.0, sum_total = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      if (end - start < 2) break;  // a 1-image tail cannot feed the penalty
      std::vector<uint32_t> batch_idx(order.begin() + start, order.begin() + end);
      Tensor batch = normalize_subset(ds, batch_idx);
      StepResult recon = reconstruction_step(enc, dec, batch);

      // One penalty batch per reconstruction batch, same size, single
      // class drawn uniformly over the classes that exist.
      double penalty_loss = 0.0;
      if (cfg.penalty_weight > 0.0) {
        const int32_t cls =
            classes_present[penalty_rng.uniform_int(classes_present.size())];
        result.penalty_class_draws.push_back(cls);
        const auto& pool = per_class[cls];
        std::vector<uint32_t> class_idx(batch_idx.size());
        if (pool.size() >= class_idx.size()) {
          std::vector<uint32_t> shuffled = pool;
          penalty_rng.shuffle(shuffled);
          std::copy_n(shuffled.begin(), class_idx.size(), class_idx.begin());
        } else {
          for (auto& v : class_idx) v = pool[penalty_rng.uniform_int(pool.size())];
        }
        Tensor class_batch = normalize_subset(ds, class_idx);
        std::vector<int32_t> class_labels(class_idx.size(), cls);
        StepResult pen = penalty_step(enc, dec, class_batch, class_labels,
                                      cfg.permutation, penalty_rng);
        penalty_loss = pen.loss;
        recon.enc_grads.axpy(cfg.penalty_weight, pen.enc_grads);
        recon.dec_grads.axpy(cfg.penalty_weight, pen.dec_grads);
      }
      adam_step(enc.params, recon.enc_grads, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
      adam_step(dec.params, recon.dec_grads, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);

      const double total = recon.loss + cfg.penalty_weight * penalty_loss;
      if (!std::isfinite(total))
        throw NumericError("total loss is not finite at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      sum_recon += recon.loss;
      sum_pen += penalty_loss;
      sum_total += total;
      batches++;
    }
    if (batches == 0) throw DataError("train: dataset smaller than one batch");
    LossRecord rec;
    rec.epoch = epoch;
    rec.recon = sum_recon / batches;
    rec.penalty = sum_pen / batches;
    rec.total = sum_total / batches;
    result.history.push_back(rec);

    // Plateau rule
    const double rel =
        best == std::numeric_limits<double>::infinity()
            ? 1.0
            : (best - rec.total) / std::max(std::abs(best), 1e-12);
    if (rel < cfg.plateau_rel) {
      if (++stale >= cfg.plateau_patience) break;
    } else {
      stale = 0;
    }
    best = std::min(best, rec.total);
  }
  return result;
}

}  // namespace dsmote
