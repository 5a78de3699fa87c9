#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsmote/classifier.hpp"
#include "dsmote/dataset.hpp"
#include "dsmote/metrics.hpp"
#include "dsmote/oversampler.hpp"
#include "dsmote/trainer.hpp"

namespace dsmote {

enum class Method { none, pixel_smote, deep_smote };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct ExperimentConfig {
  Method method = Method::none;
  std::vector<size_t> profile_counts;
  std::vector<size_t> balanced_test_counts;
  std::vector<size_t> imbalanced_test_counts;
  TrainConfig train;    // autoencoder (deep_smote only)
  int smote_k = 5;
  ClassifierConfig clf;
  uint64_t seed = 0;    // master seed; every stage derives a named stream
};

struct ExperimentResult {
  MetricsReport balanced, imbalanced;
  ConfusionMatrix balanced_cm{0}, imbalanced_cm{0};
  double imbalance_ratio = 1.0;
  std::vector<size_t> classifier_train_histogram;
};

// Full pipeline for one run: imbalance injection -> method-specific
// oversampling -> classifier training -> evaluation under both test
// protocols. Training data and test data must come from different splits
// (checked via dataset provenance).
ExperimentResult run_experiment(const ImageDataset& train_full,
                                const ImageDataset& test_full,
                                const ExperimentConfig& cfg);

// Geometric profile ladder: class c of k gets round(majority *
// ratio^(-c/(k-1))), floored at 1.
std::vector<size_t> ratio_profile(size_t majority, double ratio, int classes);

struct SweepConfig {
  std::vector<double> ratios;  // strictly increasing
  std::vector<Method> methods;
  int repetitions = 2;
  size_t train_majority = 400;
  size_t balanced_test_per_class = 120;
  size_t imbalanced_test_majority = 100;
  TrainConfig train;
  int smote_k = 5;
  ClassifierConfig clf;
  uint64_t seed = 0;
};

// One evaluated protocol of one run; also the CSV row unit.
struct RunRow {
  std::string method;
  double ratio = 0.0;
  uint64_t seed = 0;
  int fold = 0;
  std::string protocol;
  MetricsReport report;
};

struct SweepCell {
  std::string method;
  double ratio = 0.0;
  std::string protocol;
  double mean_acsa = 0, sd_acsa = 0;
  double mean_gm = 0, sd_gm = 0;
  double mean_f1 = 0, sd_f1 = 0;
};

struct SweepResult {
  std::vector<RunRow> runs;
  std::vector<SweepCell> cells;          // methods x ratios x protocols
  std::vector<std::string> trend_flags;  // recorded, never asserted
};

SweepResult sweep(const ImageDataset& train_full, const ImageDataset& test_full,
                  const SweepConfig& cfg);

// "method,ratio,seed,fold,protocol,acsa,gm,f1" rows; byte-stable.
void write_runs_csv(const std::string& path, const std::vector<RunRow>& rows);

}  // namespace dsmote
