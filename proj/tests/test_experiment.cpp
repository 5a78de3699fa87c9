#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dsmote/experiment.hpp"
#include "dsmote/synth.hpp"

using namespace dsmote;

namespace {

// Two trivially separable classes: dark images vs bright images.
ImageDataset two_blob_dataset(size_t per_class, uint64_t seed,
                              const std::string& provenance) {
  Rng rng(seed);
  ImageDataset ds;
  ds.channels = 1;
  ds.height = 16;
  ds.width = 16;
  ds.class_count = 2;
  ds.provenance = provenance;
  for (size_t i = 0; i < 2 * per_class; ++i) {
    const int32_t cls = static_cast<int32_t>(i % 2);
    for (int p = 0; p < 16 * 16; ++p) {
      const int base = cls == 0 ? 40 : 200;
      ds.pixels.push_back(
          static_cast<uint8_t>(base + static_cast<int>(rng.uniform_int(30))));
    }
    ds.labels.push_back(cls);
  }
  return ds;
}

ClassifierConfig tiny_clf(int epochs) {
  ClassifierConfig c;
  c.epochs = epochs;
  c.batch_size = 16;
  c.hidden = 16;
  return c;
}

}  // namespace

TEST_CASE("classifier: separable blobs reach near-perfect training accuracy") {
  ImageDataset train = two_blob_dataset(20, 1, "train");
  ClassifierConfig cfg = tiny_clf(50);
  cfg.seed = 2;
  Net clf = train_classifier(train, cfg);
  const double acc = accuracy(predict(clf, train), train.labels);
  CHECK(acc >= 0.99);
}

TEST_CASE("classifier: single-class training set yields a constant perfect predictor") {
  ImageDataset train = two_blob_dataset(15, 3, "train");
  // keep only class 1
  ImageDataset solo;
  solo.channels = train.channels;
  solo.height = train.height;
  solo.width = train.width;
  solo.class_count = 2;
  solo.provenance = "train";
  for (size_t i = 0; i < train.size(); ++i) {
    if (train.labels[i] != 1) continue;
    solo.pixels.insert(solo.pixels.end(), train.image(i),
                       train.image(i) + train.image_bytes());
    solo.labels.push_back(1);
  }
  ClassifierConfig cfg = tiny_clf(10);
  cfg.seed = 4;
  Net clf = train_classifier(solo, cfg);
  CHECK(accuracy(predict(clf, solo), solo.labels) == 1.0);
}

TEST_CASE("classifier: label-shuffled data scores at chance level") {
  ImageDataset train = two_blob_dataset(40, 5, "train");
  Rng rng(6);
  rng.shuffle(train.labels);  // destroy the signal
  ClassifierConfig cfg = tiny_clf(10);
  cfg.seed = 7;
  Net clf = train_classifier(train, cfg);
  ImageDataset test = two_blob_dataset(40, 8, "test");
  const double acc = accuracy(predict(clf, test), test.labels);
  CHECK(acc >= 0.5 - 0.15);
  CHECK(acc <= 0.5 + 0.15);
}

TEST_CASE("run_experiment: no skew makes the two protocols coincide up to sampling") {
  ImageDataset train = make_glyph_dataset(std::vector<size_t>(10, 60), 11, "train");
  ImageDataset test = make_glyph_dataset(std::vector<size_t>(10, 60), 12, "test");
  ExperimentConfig ec;
  ec.method = Method::none;
  ec.profile_counts.assign(10, 50);
  ec.balanced_test_counts.assign(10, 30);
  ec.imbalanced_test_counts.assign(10, 30);
  ec.clf = tiny_clf(6);
  ec.seed = 13;
  ExperimentResult r = run_experiment(train, test, ec);
  CHECK(r.imbalance_ratio == doctest::Approx(1.0));
  CHECK(std::abs(r.balanced.acsa - r.imbalanced.acsa) <= 0.25);
  CHECK(r.balanced.protocol == "balanced");
  CHECK(r.imbalanced.protocol == "imbalanced");
}

TEST_CASE("run_experiment: pixel_smote balances the classifier's training histogram") {
  ImageDataset train = make_glyph_dataset(std::vector<size_t>(10, 70), 14, "train");
  ImageDataset test = make_glyph_dataset(std::vector<size_t>(10, 40), 15, "test");
  ExperimentConfig ec;
  ec.method = Method::pixel_smote;
  ec.profile_counts = {60, 40, 30, 20, 15, 10, 8, 6, 5, 4};
  ec.balanced_test_counts.assign(10, 20);
  ec.imbalanced_test_counts = {20, 10, 8, 6, 5, 4, 3, 2, 1, 1};
  ec.clf = tiny_clf(2);
  ec.seed = 16;
  ExperimentResult r = run_experiment(train, test, ec);
  for (size_t c : r.classifier_train_histogram) CHECK(c == 60);
  CHECK(r.imbalance_ratio == doctest::Approx(15.0));
}

TEST_CASE("run_experiment: deterministic under fixed seeds") {
  ImageDataset train = make_glyph_dataset(std::vector<size_t>(10, 40), 17, "train");
  ImageDataset test = make_glyph_dataset(std::vector<size_t>(10, 30), 18, "test");
  ExperimentConfig ec;
  ec.method = Method::pixel_smote;
  ec.profile_counts = {30, 20, 15, 10, 8, 6, 5, 4, 3, 2};
  ec.balanced_test_counts.assign(10, 15);
  ec.imbalanced_test_counts = {15, 8, 5, 4, 3, 2, 2, 1, 1, 1};
  ec.clf = tiny_clf(2);
  ec.seed = 19;
  ExperimentResult a = run_experiment(train, test, ec);
  ExperimentResult b = run_experiment(train, test, ec);
  CHECK(a.balanced.acsa == b.balanced.acsa);
  CHECK(a.balanced.gm == b.balanced.gm);
  CHECK(a.imbalanced.macro_f1 == b.imbalanced.macro_f1);
  CHECK(a.balanced_cm.counts == b.balanced_cm.counts);
}

TEST_CASE("run_experiment: training data must never descend from the test split") {
  ImageDataset train = make_glyph_dataset(std::vector<size_t>(10, 20), 20, "same");
  ImageDataset test = make_glyph_dataset(std::vector<size_t>(10, 20), 21, "same");
  ExperimentConfig ec;
  ec.method = Method::none;
  ec.profile_counts.assign(10, 10);
  ec.balanced_test_counts.assign(10, 5);
  ec.imbalanced_test_counts.assign(10, 5);
  ec.clf = tiny_clf(1);
  CHECK_THROWS_AS(run_experiment(train, test, ec), DataError);
}

TEST_CASE("ratio_profile: geometric ladder hits the requested extremes") {
  const auto p20 = ratio_profile(400, 20.0, 10);
  CHECK(p20.front() == 400);
  CHECK(p20.back() == 20);  // 400/20
  const auto p400 = ratio_profile(400, 400.0, 10);
  CHECK(p400.front() == 400);
  CHECK(p400.back() == 1);
  const auto flat = ratio_profile(50, 1.0, 10);
  CHECK(flat == std::vector<size_t>(10, 50));
  for (size_t i = 1; i < p20.size(); ++i) CHECK(p20[i] <= p20[i - 1]);
}

TEST_CASE("sweep: spreads are zero for a single repetition and rows are ordered") {
  ImageDataset train = make_glyph_dataset(std::vector<size_t>(10, 70), 22, "train");
  ImageDataset test = make_glyph_dataset(std::vector<size_t>(10, 40), 23, "test");
  SweepConfig sc;
  sc.ratios = {5, 20};
  sc.methods = {Method::none};
  sc.repetitions = 1;
  sc.train_majority = 60;
  sc.balanced_test_per_class = 20;
  sc.imbalanced_test_majority = 20;
  sc.clf = tiny_clf(2);
  sc.seed = 24;
  SweepResult res = sweep(train, test, sc);
  // rows: ratios x methods x reps x protocols
  CHECK(res.runs.size() == 2 * 1 * 1 * 2);
  CHECK(res.cells.size() == 2 * 1 * 2);
  for (const auto& c : res.cells) {
    CHECK(c.sd_acsa == 0.0);
    CHECK(c.sd_gm == 0.0);
    CHECK(c.sd_f1 == 0.0);
  }
  // ratio-ordered rows
  double last = 0.0;
  for (const auto& r : res.runs) {
    CHECK(r.ratio >= last);
    last = r.ratio;
  }
}

TEST_CASE("sweep: two repetitions produce paired seeds and sample spreads") {
  ImageDataset train = make_glyph_dataset(std::vector<size_t>(10, 70), 25, "train");
  ImageDataset test = make_glyph_dataset(std::vector<size_t>(10, 40), 26, "test");
  SweepConfig sc;
  sc.ratios = {10};
  sc.methods = {Method::none, Method::pixel_smote};
  sc.repetitions = 2;
  sc.train_majority = 50;
  sc.balanced_test_per_class = 15;
  sc.imbalanced_test_majority = 15;
  sc.clf = tiny_clf(2);
  sc.seed = 27;
  SweepResult res = sweep(train, test, sc);
  CHECK(res.runs.size() == 1 * 2 * 2 * 2);
  // paired: both methods see the same seed set
  std::set<uint64_t> none_seeds, pixel_seeds;
  for (const auto& r : res.runs)
    (r.method == "none" ? none_seeds : pixel_seeds).insert(r.seed);
  CHECK(none_seeds == pixel_seeds);
}
