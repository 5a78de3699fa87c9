#include "dsmote/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dsmote/error.hpp"
#include "dsmote/models.hpp"
#include "dsmote/rng.hpp"
#include "dsmote/smote.hpp"

namespace dsmote {

const char* method_name(Method m) {
  switch (m) {
    case Method::none: return "none";
    case Method::pixel_smote: return "pixel_smote";
    case Method::deep_smote: return "deep_smote";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "none") return Method::none;
  if (name == "pixel_smote") return Method::pixel_smote;
  if (name == "deep_smote") return Method::deep_smote;
  throw ConfigError("method", "unknown method '" + name + "'");
}

namespace {

double profile_ratio(const std::vector<size_t>& counts) {
  size_t mx = 0, mn = SIZE_MAX;
  for (size_t c : counts) {
    mx = std::max(mx, c);
    mn = std::min(mn, c);
  }
  return mn == 0 ? 0.0 : static_cast<double>(mx) / static_cast<double>(mn);
}

// SMOTE on raw pixel vectors; synthetics are rounded back to 8-bit.
ImageDataset pixel_smote_balance(const ImageDataset& ds, int k, uint64_t seed) {
  const auto hist = ds.histogram();
  const size_t majority = *std::max_element(hist.begin(), hist.end());

  LabeledVectors vecs;
  vecs.dim = static_cast<int>(ds.image_bytes());
  vecs.labels = ds.labels;
  vecs.data.resize(ds.size() * ds.image_bytes());
  for (size_t i = 0; i < ds.pixels.size(); ++i)
    vecs.data[i] = static_cast<float>(ds.pixels[i]);

  SmoteConfig cfg;
  cfg.k = k;
  cfg.seed = seed;
  for (int c = 0; c < ds.class_count; ++c)
    if (hist[c] > 0 && hist[c] < majority) cfg.targets[c] = majority;
  LabeledVectors synth = oversample(vecs, cfg);

  ImageDataset out = ds;
  out.pixels.reserve(out.pixels.size() + synth.count() * ds.image_bytes());
  for (size_t i = 0; i < synth.count(); ++i) {
    const float* row = synth.row(i);
    for (size_t j = 0; j < ds.image_bytes(); ++j) {
      const float v = std::clamp(row[j], 0.0f, 255.0f);
      out.pixels.push_back(static_cast<uint8_t>(std::lround(v)));
    }
    out.labels.push_back(synth.labels[i]);
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ImageDataset& train_full,
                                const ImageDataset& test_full,
                                const ExperimentConfig& cfg) {
  if (train_full.provenance == test_full.provenance)
    throw DataError("run_experiment: train and test splits share provenance '" +
                    train_full.provenance + "'");

  ImbalanceProfile profile;
  profile.counts = cfg.profile_counts;
  profile.seed = derive_seed(cfg.seed, "imbalance");
  ImageDataset train_imb = apply_imbalance(train_full, profile);

  auto [test_bal, test_imb] =
      build_test_sets(test_full, cfg.balanced_test_counts, cfg.imbalanced_test_counts,
                      derive_seed(cfg.seed, "testsets"));

  ImageDataset clf_train;
  switch (cfg.method) {
    case Method::none:
      clf_train = train_imb;
      break;
    case Method::pixel_smote:
      clf_train = pixel_smote_balance(train_imb, cfg.smote_k,
                                      derive_seed(cfg.seed, "pixel_smote"));
      break;
    case Method::deep_smote: {
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.seed, "train");
      const NetworkSpec enc =
          encoder_spec(train_imb.channels, kNetImage, tc.width, tc.latent_dim);
      const NetworkSpec dec =
          decoder_spec(train_imb.channels, kNetImage, tc.width, tc.latent_dim);
      TrainResult tr = train(enc, dec, train_imb, tc);
      GenerationPlan plan;
      plan.k = cfg.smote_k;
      plan.seed = derive_seed(cfg.seed, "smote");
      clf_train =
          generate_balanced(tr.encoder, tr.decoder, train_imb, plan).dataset;
      break;
    }
  }
  if (clf_train.provenance == test_full.provenance)
    throw DataError("run_experiment: classifier training set descends from test data");

  ClassifierConfig cc = cfg.clf;
  cc.seed = derive_seed(cfg.seed, "classifier");
  Net clf = train_classifier(clf_train, cc);

  ExperimentResult res;
  res.imbalance_ratio = profile_ratio(cfg.profile_counts);
  res.classifier_train_histogram = clf_train.histogram();
  res.balanced_cm =
      confusion(predict(clf, test_bal), test_bal.labels, test_bal.class_count);
  res.imbalanced_cm =
      confusion(predict(clf, test_imb), test_imb.labels, test_imb.class_count);
  res.balanced = metrics(res.balanced_cm);
  res.balanced.protocol = "balanced";
  res.imbalanced = metrics(res.imbalanced_cm);
  res.imbalanced.protocol = "imbalanced";
  return res;
}

std::vector<size_t> ratio_profile(size_t majority, double ratio, int classes) {
  if (ratio < 1.0) throw ConfigError("ratio", "imbalance ratio must be >= 1");
  if (classes < 2) throw ConfigError("classes", "need at least 2 classes");
  std::vector<size_t> counts(classes);
  for (int c = 0; c < classes; ++c) {
    const double x = static_cast<double>(majority) *
                     std::pow(ratio, -static_cast<double>(c) / (classes - 1));
    counts[c] = std::max<size_t>(1, static_cast<size_t>(std::llround(x)));
  }
  return counts;
}

SweepResult sweep(const ImageDataset& train_full, const ImageDataset& test_full,
                  const SweepConfig& cfg) {
  if (cfg.ratios.empty()) throw ConfigError("eval.ratios", "ratio list is empty");
  for (size_t i = 1; i < cfg.ratios.size(); ++i)
    if (cfg.ratios[i] <= cfg.ratios[i - 1])
      throw ConfigError("eval.ratios", "ratios must be strictly increasing");
  if (cfg.repetitions < 1) throw ConfigError("eval.repetitions", "must be >= 1");

  const int classes = train_full.class_count;
  SweepResult out;
  for (double ratio : cfg.ratios) {
    for (Method m : cfg.methods) {
      std::vector<MetricsReport> reps_bal, reps_imb;
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        ExperimentConfig ec;
        ec.method = m;
        ec.profile_counts = ratio_profile(cfg.train_majority, ratio, classes);
        ec.balanced_test_counts.assign(classes, cfg.balanced_test_per_class);
        ec.imbalanced_test_counts =
            ratio_profile(cfg.imbalanced_test_majority, ratio, classes);
        ec.train = cfg.train;
        ec.smote_k = cfg.smote_k;
        ec.clf = cfg.clf;
        ec.seed = cfg.seed + static_cast<uint64_t>(rep);  // paired across methods
        ExperimentResult r = run_experiment(train_full, test_full, ec);
        reps_bal.push_back(r.balanced);
        reps_imb.push_back(r.imbalanced);
        for (const auto* rep_report : {&r.balanced, &r.imbalanced}) {
          RunRow row;
          row.method = method_name(m);
          row.ratio = ratio;
          row.seed = ec.seed;
          row.fold = 0;
          row.protocol = rep_report->protocol;
          row.report = *rep_report;
          out.runs.push_back(std::move(row));
        }
      }
      auto aggregate = [&](const std::vector<MetricsReport>& reps,
                           const std::string& protocol) {
        SweepCell cell;
        cell.method = method_name(m);
        cell.ratio = ratio;
        cell.protocol = protocol;
        auto mean_sd = [&](auto pick, double& mean, double& sd) {
          double s = 0.0;
          for (const auto& r : reps) s += pick(r);
          mean = s / reps.size();
          if (reps.size() < 2) {
            sd = 0.0;  // sample sd undefined for one repetition
            return;
          }
          double q = 0.0;
          for (const auto& r : reps) q += (pick(r) - mean) * (pick(r) - mean);
          sd = std::sqrt(q / (reps.size() - 1));
        };
        mean_sd([](const MetricsReport& r) { return r.acsa; }, cell.mean_acsa,
                cell.sd_acsa);
        mean_sd([](const MetricsReport& r) { return r.gm; }, cell.mean_gm, cell.sd_gm);
        mean_sd([](const MetricsReport& r) { return r.macro_f1; }, cell.mean_f1,
                cell.sd_f1);
        out.cells.push_back(cell);
      };
      aggregate(reps_bal, "balanced");
      aggregate(reps_imb, "imbalanced");
    }
  }

  // Expectation on unmitigated skew: metrics should not improve as the
  // ratio grows. Violations are recorded, not failures.
  for (Method m : cfg.methods) {
    if (m != Method::none) continue;
    for (const char* protocol : {"balanced", "imbalanced"}) {
      const SweepCell* prev = nullptr;
      for (const auto& cell : out.cells) {
        if (cell.method != method_name(m) || cell.protocol != protocol) continue;
        if (prev && cell.mean_acsa > prev->mean_acsa + 1e-9) {
          char buf[160];
          std::snprintf(buf, sizeof buf,
                        "method=none %s ACSA rose from %.4f (ratio %g) to %.4f "
                        "(ratio %g)",
                        protocol, prev->mean_acsa, prev->ratio, cell.mean_acsa,
                        cell.ratio);
          out.trend_flags.emplace_back(buf);
        }
        prev = &cell;
      }
    }
  }
  return out;
}

void write_runs_csv(const std::string& path, const std::vector<RunRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError(path + ": cannot open for writing");
  os << "method,ratio,seed,fold,protocol,acsa,gm,f1\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%g,%llu,%d,%s,%.6f,%.6f,%.6f\n",
                  r.method.c_str(), r.ratio,
                  static_cast<unsigned long long>(r.seed), r.fold,
                  r.protocol.c_str(), r.report.acsa, r.report.gm, r.report.macro_f1);
    os << buf;
  }
  if (!os) throw DataError(path + ": write failed");
}

}  // namespace dsmote
