#include "dsmote/metrics.hpp"

#include <cmath>

namespace dsmote {

int64_t ConfusionMatrix::total() const {
  int64_t t = 0;
  for (int64_t v : counts) t += v;
  return t;
}

ConfusionMatrix confusion(const std::vector<int32_t>& preds,
                          const std::vector<int32_t>& labels, int classes) {
  if (preds.size() != labels.size())
    throw DataError("confusion: prediction and label counts differ");
  ConfusionMatrix cm(classes);
  for (size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw DataError("confusion: label " + std::to_string(labels[i]) +
                      " out of range at index " + std::to_string(i));
    if (preds[i] < 0 || preds[i] >= classes)
      throw DataError("confusion: prediction " + std::to_string(preds[i]) +
                      " out of range at index " + std::to_string(i));
    cm.at(labels[i], preds[i])++;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const int k = cm.classes;
  if (k < 1) throw DataError("metrics: empty confusion matrix");
  MetricsReport r;
  r.recall.resize(k);
  r.precision.resize(k);
  r.f1.resize(k);

  for (int c = 0; c < k; ++c) {
    int64_t rowsum = 0, colsum = 0;
    for (int j = 0; j < k; ++j) {
      rowsum += cm.at(c, j);
      colsum += cm.at(j, c);
    }
    if (rowsum == 0)
      throw DataError("metrics: class " + std::to_string(c) +
                      " has no true instances");
    const double rec = static_cast<double>(cm.at(c, c)) / static_cast<double>(rowsum);
    const double prec =
        colsum == 0 ? 0.0
                    : static_cast<double>(cm.at(c, c)) / static_cast<double>(colsum);
    r.recall[c] = rec;
    r.precision[c] = prec;
    r.f1[c] = (prec + rec) == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
  }

  double sum_rec = 0.0, prod_rec = 1.0, sum_f1 = 0.0;
  for (int c = 0; c < k; ++c) {
    sum_rec += r.recall[c];
    prod_rec *= r.recall[c];
    sum_f1 += r.f1[c];
  }
  r.acsa = sum_rec / k;
  // plain product root; a single missed class zeroes the metric
  r.gm = prod_rec == 0.0 ? 0.0 : std::pow(prod_rec, 1.0 / k);
  r.macro_f1 = sum_f1 / k;
  return r;
}

}  // namespace dsmote
