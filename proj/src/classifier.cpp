#include "dsmote/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "dsmote/error.hpp"
#include "dsmote/models.hpp"

namespace dsmote {

Net train_classifier(const ImageDataset& train, const ClassifierConfig& cfg) {
  train.validate();
  if (cfg.epochs < 1) throw ConfigError("classifier.epochs", "must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("classifier.batch_size", "must be >= 1");

  Net clf;
  clf.spec = classifier_spec(train.channels, kNetImage, train.class_count, cfg.hidden);
  {
    Rng init_rng = derive_rng(cfg.seed, "clf.init");
    clf.params = init_params(clf.spec, init_rng);
  }

  std::vector<uint32_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<uint32_t>(i);
  Rng shuffle_rng = derive_rng(cfg.seed, "clf.shuffle");

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<uint32_t> idx(order.begin() + start, order.begin() + end);
      Tensor batch = normalize_subset(train, idx);
      std::vector<int32_t> labels(idx.size());
      for (size_t i = 0; i < idx.size(); ++i) labels[i] = train.labels[idx[i]];

      ForwardCache cache;
      Tensor logits = forward(clf.spec, clf.params, batch, Mode::train, &cache);
      auto [loss, grad] = softmax_xent_loss(logits, labels);
      if (!std::isfinite(loss))
        throw NumericError("classifier loss is not finite at epoch " +
                           std::to_string(epoch));
      GradStore grads = GradStore::zeros_like(clf.params);
      backward(clf.spec, clf.params, cache, grad, grads);
      adam_step(clf.params, grads, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
    }
  }
  return clf;
}

std::vector<int32_t> predict(Net& clf, const ImageDataset& ds) {
  std::vector<int32_t> preds(ds.size());
  constexpr size_t kChunk = 256;
  std::vector<uint32_t> idx;
  for (size_t start = 0; start < ds.size(); start += kChunk) {
    const size_t end = std::min(ds.size(), start + kChunk);
    idx.resize(end - start);
    for (size_t i = start; i < end; ++i) idx[i - start] = static_cast<uint32_t>(i);
    Tensor batch = normalize_subset(ds, idx);
    Tensor logits = forward(clf.spec, clf.params, batch, Mode::eval, nullptr);
    const int k = logits.shape[1];
    for (size_t i = 0; i < idx.size(); ++i) {
      const float* row = logits.ptr() + i * static_cast<size_t>(k);
      preds[start + i] =
          static_cast<int32_t>(std::max_element(row, row + k) - row);
    }
  }
  return preds;
}

double accuracy(const std::vector<int32_t>& preds, const std::vector<int32_t>& labels) {
  if (preds.size() != labels.size() || preds.empty())
    throw DataError("accuracy: size mismatch");
  size_t hits = 0;
  for (size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == labels[i]) hits++;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

}  // namespace dsmote
