#include <doctest.h>

#include <cmath>

#include "dsmote/metrics.hpp"
#include "dsmote/rng.hpp"

using namespace dsmote;

namespace {

// Brute-force tally/metric oracle kept independent of the implementation.
ConfusionMatrix oracle_confusion(const std::vector<int32_t>& preds,
                                 const std::vector<int32_t>& labels, int k) {
  ConfusionMatrix cm(k);
  for (size_t i = 0; i < preds.size(); ++i)
    cm.counts[static_cast<size_t>(labels[i]) * k + preds[i]]++;
  return cm;
}

struct OracleMetrics {
  double acsa, gm, f1;
};

OracleMetrics oracle_metrics(const ConfusionMatrix& cm) {
  const int k = cm.classes;
  double sum_rec = 0, prod = 1, sum_f1 = 0;
  for (int c = 0; c < k; ++c) {
    double row = 0, col = 0;
    for (int j = 0; j < k; ++j) {
      row += static_cast<double>(cm.at(c, j));
      col += static_cast<double>(cm.at(j, c));
    }
    const double rec = cm.at(c, c) / row;
    const double prec = col == 0 ? 0.0 : cm.at(c, c) / col;
    sum_rec += rec;
    prod *= rec;
    sum_f1 += (prec + rec) == 0 ? 0.0 : 2 * prec * rec / (prec + rec);
  }
  return {sum_rec / k, prod == 0 ? 0.0 : std::pow(prod, 1.0 / k), sum_f1 / k};
}

}  // namespace

TEST_CASE("confusion: diagonal for a perfect predictor") {
  std::vector<int32_t> labels = {0, 1, 2, 1, 0};
  ConfusionMatrix cm = confusion(labels, labels, 3);
  CHECK(cm.total() == 5);
  for (int t = 0; t < 3; ++t)
    for (int p = 0; p < 3; ++p)
      if (t != p) CHECK(cm.at(t, p) == 0);
}

TEST_CASE("confusion: two-class worked example") {
  ConfusionMatrix cm = confusion({1, 1}, {0, 1}, 2);
  CHECK(cm.at(0, 0) == 0);
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(1, 0) == 0);
  CHECK(cm.at(1, 1) == 1);
}

TEST_CASE("confusion: random case matches the tally oracle; bad labels throw") {
  Rng rng(5);
  std::vector<int32_t> preds(100), labels(100);
  for (int i = 0; i < 100; ++i) {
    preds[i] = static_cast<int32_t>(rng.uniform_int(4));
    labels[i] = static_cast<int32_t>(rng.uniform_int(4));
  }
  ConfusionMatrix a = confusion(preds, labels, 4);
  ConfusionMatrix b = oracle_confusion(preds, labels, 4);
  CHECK(a.counts == b.counts);

  preds[3] = 9;
  CHECK_THROWS_AS(confusion(preds, labels, 4), DataError);
}

TEST_CASE("metrics: perfect classifier scores 1 everywhere") {
  ConfusionMatrix cm(3);
  cm.at(0, 0) = 5;
  cm.at(1, 1) = 2;
  cm.at(2, 2) = 9;
  MetricsReport r = metrics(cm);
  CHECK(r.acsa == doctest::Approx(1.0));
  CHECK(r.gm == doctest::Approx(1.0));
  CHECK(r.macro_f1 == doctest::Approx(1.0));
}

TEST_CASE("metrics: a fully missed class zeroes GM but not ACSA") {
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 10;       // class 0 perfect
  cm.at(1, 0) = 5;        // class 1 entirely missed
  MetricsReport r = metrics(cm);
  CHECK(r.gm == 0.0);
  CHECK(r.acsa == doctest::Approx(0.5));
}

TEST_CASE("metrics: hand-derived worked example cm=[[3,1],[2,4]]") {
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 3;
  cm.at(0, 1) = 1;
  cm.at(1, 0) = 2;
  cm.at(1, 1) = 4;
  MetricsReport r = metrics(cm);
  CHECK(r.recall[0] == doctest::Approx(0.75));
  CHECK(r.recall[1] == doctest::Approx(2.0 / 3.0));
  CHECK(r.acsa == doctest::Approx(0.7083333333));
  CHECK(r.gm == doctest::Approx(std::sqrt(0.75 * 2.0 / 3.0)));  // 0.7071...
  CHECK(r.precision[0] == doctest::Approx(0.6));
  CHECK(r.precision[1] == doctest::Approx(0.8));
  CHECK(r.f1[0] == doctest::Approx(2.0 / 3.0));
  CHECK(r.f1[1] == doctest::Approx(8.0 / 11.0));  // 0.7272...
  CHECK(r.macro_f1 == doctest::Approx(0.696969696969));
}

TEST_CASE("metrics: identities against the oracle on random confusion matrices") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_int(9));
    ConfusionMatrix cm(k);
    for (int t = 0; t < k; ++t) {
      for (int p = 0; p < k; ++p) cm.at(t, p) = static_cast<int64_t>(rng.uniform_int(30));
      cm.at(t, t) += 1;  // keep every row non-empty
    }
    MetricsReport r = metrics(cm);
    OracleMetrics o = oracle_metrics(cm);
    CHECK(std::abs(r.acsa - o.acsa) <= 1e-9);
    CHECK(std::abs(r.gm - o.gm) <= 1e-9);
    CHECK(std::abs(r.macro_f1 - o.f1) <= 1e-9);
    // bounds and AM-GM
    CHECK(r.acsa >= 0.0);
    CHECK(r.acsa <= 1.0);
    CHECK(r.gm <= r.acsa + 1e-12);
  }
}

TEST_CASE("metrics: relabeling classes by a permutation changes nothing") {
  Rng rng(7);
  const int k = 5;
  ConfusionMatrix cm(k);
  for (int t = 0; t < k; ++t)
    for (int p = 0; p < k; ++p) cm.at(t, p) = static_cast<int64_t>(rng.uniform_int(20)) + 1;
  MetricsReport r1 = metrics(cm);

  const auto perm = rng.permutation(k);
  ConfusionMatrix pm(k);
  for (int t = 0; t < k; ++t)
    for (int p = 0; p < k; ++p) pm.at(perm[t], perm[p]) = cm.at(t, p);
  MetricsReport r2 = metrics(pm);
  CHECK(r1.acsa == doctest::Approx(r2.acsa).epsilon(1e-12));
  CHECK(r1.gm == doctest::Approx(r2.gm).epsilon(1e-12));
  CHECK(r1.macro_f1 == doctest::Approx(r2.macro_f1).epsilon(1e-12));
}

TEST_CASE("metrics: empty class row is a typed error") {
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 4;  // class 1 never appears
  CHECK_THROWS_AS(metrics(cm), DataError);
}
