#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsmote/classifier.hpp"
#include "dsmote/experiment.hpp"
#include "dsmote/trainer.hpp"

namespace dsmote {

// Everything a batch run needs, parsed from a JSON config file. Parse and
// validation failures throw ConfigError carrying the full field path.
struct RunConfig {
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;

  struct {
    std::string train_images, train_labels, test_images, test_labels;
  } dataset;

  Method method = Method::deep_smote;
  std::vector<size_t> profile_counts;   // default: desk MNIST profile
  std::vector<int32_t> profile_class_order;

  TrainConfig train;
  int smote_k = 5;
  std::vector<size_t> plan_counts;      // empty = balance to majority

  ClassifierConfig clf;

  struct {
    std::vector<Method> methods{Method::none, Method::deep_smote};
    int repeats = 3;
    std::vector<size_t> balanced_test_counts;    // default: 120 each
    std::vector<size_t> imbalanced_test_counts;  // default: desk Table ladder
    std::vector<double> ratios{20, 100, 400};
    int sweep_repetitions = 2;
    size_t sweep_train_majority = 400;
    size_t sweep_balanced_test_per_class = 120;
    size_t sweep_imbalanced_test_majority = 100;
  } eval;

  std::string checkpoint_dir;  // defaults to <out>/checkpoints

  // Canonical JSON echo (stable key order) for manifests.
  std::string to_json() const;
};

RunConfig load_run_config(const std::string& path);

// Existence checks for the dataset paths a subcommand needs.
void validate_dataset_paths(const RunConfig& cfg, bool needs_test);

}  // namespace dsmote
