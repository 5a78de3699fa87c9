#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsmote/error.hpp"

namespace dsmote {

// K x K counts, rows = true class, cols = predicted class.
struct ConfusionMatrix {
  int classes = 0;
  std::vector<int64_t> counts;

  explicit ConfusionMatrix(int k = 0) : classes(k), counts(static_cast<size_t>(k) * k, 0) {}
  int64_t& at(int truth, int pred) { return counts[static_cast<size_t>(truth) * classes + pred]; }
  int64_t at(int truth, int pred) const {
    return counts[static_cast<size_t>(truth) * classes + pred];
  }
  int64_t total() const;
};

// Skew-insensitive aggregates. acsa = mean per-class recall, gm =
// geometric mean of recalls (exactly 0 if any class is fully missed),
// macro_f1 = unweighted mean per-class F1.
struct MetricsReport {
  double acsa = 0.0;
  double gm = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> recall, precision, f1;
  std::string protocol;  // "balanced" or "imbalanced"
};

ConfusionMatrix confusion(const std::vector<int32_t>& preds,
                          const std::vector<int32_t>& labels, int classes);

// Every class must have at least one true instance (non-zero row).
MetricsReport metrics(const ConfusionMatrix& cm);

}  // namespace dsmote
