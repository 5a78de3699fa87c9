#include "dsmote/commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "dsmote/error.hpp"
#include "dsmote/models.hpp"
#include "dsmote/plot.hpp"
#include "dsmote/rng.hpp"

namespace dsmote {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// At most one writer per output directory.
class OutputLock {
 public:
  explicit OutputLock(const std::string& dir) : path_(dir + "/.lock") {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw DataError(dir + ": output directory is locked by another writer"
                            " (remove .lock if that run is dead)");
    ::close(fd);
  }
  ~OutputLock() { ::unlink(path_.c_str()); }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::string path_;
};

std::string prepare_out(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("out", "missing required field");
  if (!cfg.seed_set) throw ConfigError("seed", "missing required field");
  fs::create_directories(cfg.out_dir);
  fs::create_directories(cfg.out_dir + "/checkpoints");
  fs::create_directories(cfg.out_dir + "/reports");
  fs::create_directories(cfg.out_dir + "/images");
  return cfg.out_dir;
}

void write_manifest(const RunConfig& cfg, const char* command, json extra) {
  json m;
  m["command"] = command;
  m["seed"] = cfg.seed;
  m["latent_dim"] = cfg.train.latent_dim;
  m["lr"] = cfg.train.lr;
  m["config"] = json::parse(cfg.to_json());
  for (auto& [k, v] : extra.items()) m[k] = v;
  std::ofstream os(cfg.out_dir + "/manifest.json", std::ios::trunc);
  if (!os) throw DataError(cfg.out_dir + "/manifest.json: cannot open for writing");
  os << m.dump(2) << '\n';
}

ImageDataset load_train(const RunConfig& cfg) {
  ImageDataset ds = load_idx(cfg.dataset.train_images, cfg.dataset.train_labels);
  ds.provenance = "train";
  return ds;
}

ImageDataset load_test(const RunConfig& cfg) {
  ImageDataset ds = load_idx(cfg.dataset.test_images, cfg.dataset.test_labels);
  ds.provenance = "test";
  return ds;
}

ImageDataset imbalanced_train(const RunConfig& cfg, const ImageDataset& full) {
  ImbalanceProfile profile;
  profile.counts = cfg.profile_counts;
  profile.class_order = cfg.profile_class_order;
  profile.seed = derive_seed(cfg.seed, "imbalance");
  return apply_imbalance(full, profile);
}

void check_architecture(const ParamStore& loaded, const NetworkSpec& spec,
                        const char* which) {
  Rng probe(0);
  ParamStore expected = init_params(spec, probe);
  size_t li = 0;
  for (const auto& e : expected.entries) {
    while (li < loaded.entries.size() &&
           loaded.entries[li].name.rfind("adam.", 0) == 0)
      li++;
    if (li >= loaded.entries.size() || loaded.entries[li].name != e.name ||
        loaded.entries[li].value.shape != e.value.shape)
      throw DataError(std::string(which) + " checkpoint does not match the configured "
                      "architecture at parameter '" + e.name + "'");
    li++;
  }
}

json report_json(const MetricsReport& r) {
  json j;
  j["protocol"] = r.protocol;
  j["acsa"] = r.acsa;
  j["gm"] = r.gm;
  j["macro_f1"] = r.macro_f1;
  j["recall"] = r.recall;
  j["precision"] = r.precision;
  j["f1"] = r.f1;
  return j;
}

// Full-scale reference results (imbalanced-test protocol) kept as
// non-reproducible anchors; desk-scale runs are directional only.
json reference_anchor() {
  return json{{"dataset", "MNIST"},
              {"method", "deep_smote"},
              {"protocol", "imbalanced"},
              {"acsa", 96.16},
              {"gm", 98.11},
              {"f1", 96.44},
              {"scale", "full"},
              {"note", "full-scale reference values, not reproducible at desk scale"}};
}

struct MethodColor {
  const char* name;
  uint8_t r, g, b;
};
constexpr MethodColor kPalette[] = {
    {"none", 31, 119, 180},
    {"pixel_smote", 255, 127, 14},
    {"deep_smote", 44, 160, 44},
};

MethodColor color_of(const std::string& method) {
  for (const auto& c : kPalette)
    if (method == c.name) return c;
  return {"?", 0, 0, 0};
}

}  // namespace

void cmd_train(const RunConfig& cfg) {
  validate_dataset_paths(cfg, false);
  prepare_out(cfg);
  OutputLock lock(cfg.out_dir);

  ImageDataset full = load_train(cfg);
  ImageDataset ds = imbalanced_train(cfg, full);

  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, "train");
  const NetworkSpec enc = encoder_spec(ds.channels, kNetImage, tc.width, tc.latent_dim);
  const NetworkSpec dec = decoder_spec(ds.channels, kNetImage, tc.width, tc.latent_dim);
  TrainResult tr = train(enc, dec, ds, tc);

  tr.encoder.params.save(cfg.out_dir + "/checkpoints/encoder.dsmw");
  tr.decoder.params.save(cfg.out_dir + "/checkpoints/decoder.dsmw");
  {
    std::ofstream es(cfg.out_dir + "/checkpoints/encoder.spec.json", std::ios::trunc);
    es << enc.to_json() << '\n';
    std::ofstream dsj(cfg.out_dir + "/checkpoints/decoder.spec.json", std::ios::trunc);
    dsj << dec.to_json() << '\n';
  }

  {
    std::ofstream os(cfg.out_dir + "/reports/loss_history.csv", std::ios::trunc);
    if (!os) throw DataError("loss_history.csv: cannot open for writing");
    os << "epoch,recon,penalty,total\n";
    char buf[128];
    for (const auto& r : tr.history) {
      std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", r.epoch, r.recon, r.penalty,
                    r.total);
      os << buf;
    }
  }

  const LossRecord& last = tr.history.back();
  write_manifest(cfg, "train",
                 json{{"epochs_requested", cfg.train.epochs},
                      {"epochs_run", tr.history.size()},
                      {"final_recon", last.recon},
                      {"final_penalty", last.penalty},
                      {"final_total", last.total},
                      {"train_histogram", ds.histogram()},
                      {"checkpoints",
                       {{"encoder", "checkpoints/encoder.dsmw"},
                        {"decoder", "checkpoints/decoder.dsmw"}}}});
  std::cout << "trained " << tr.history.size() << " epochs, final total loss "
            << last.total << "\n";
}

void cmd_generate(const RunConfig& cfg) {
  validate_dataset_paths(cfg, false);
  prepare_out(cfg);
  OutputLock lock(cfg.out_dir);

  ImageDataset full = load_train(cfg);
  ImageDataset ds = imbalanced_train(cfg, full);

  const std::string ckpt_dir =
      cfg.checkpoint_dir.empty() ? cfg.out_dir + "/checkpoints" : cfg.checkpoint_dir;
  Net enc, dec;
  enc.spec = encoder_spec(ds.channels, kNetImage, cfg.train.width, cfg.train.latent_dim);
  dec.spec = decoder_spec(ds.channels, kNetImage, cfg.train.width, cfg.train.latent_dim);
  enc.params = ParamStore::load(ckpt_dir + "/encoder.dsmw");
  dec.params = ParamStore::load(ckpt_dir + "/decoder.dsmw");
  check_architecture(enc.params, enc.spec, "encoder");
  check_architecture(dec.params, dec.spec, "decoder");

  GenerationPlan plan;
  plan.k = cfg.smote_k;
  plan.seed = derive_seed(cfg.seed, "smote");
  plan.synthetic_counts = cfg.plan_counts;
  GenerationResult gen = generate_balanced(enc, dec, ds, plan);

  export_augmented(gen, cfg.out_dir + "/images/augmented-images-idx3-ubyte",
                   cfg.out_dir + "/images/augmented-labels-idx1-ubyte",
                   cfg.out_dir + "/images/augmented.json");

  json grids = json::array();
  for (const auto& range : gen.ranges) {
    if (range.count == 0) continue;
    const int n = static_cast<int>(std::min<size_t>(range.count, 100));
    const int cols = n >= 10 ? 10 : n;
    const int rows = std::max(1, n / cols);
    const std::string path =
        cfg.out_dir + "/images/class_" + std::to_string(range.class_id) + ".png";
    export_image_grid(gen.dataset, range.start, rows, cols, path);
    grids.push_back(path);
  }

  write_manifest(cfg, "generate",
                 json{{"augmented_total", gen.dataset.size()},
                      {"histogram", gen.dataset.histogram()},
                      {"synthetic_classes", gen.ranges.size()},
                      {"grids", grids}});
  std::cout << "augmented dataset: " << gen.dataset.size() << " images, "
            << gen.ranges.size() << " classes received synthetics\n";
}

void cmd_evaluate(const RunConfig& cfg) {
  validate_dataset_paths(cfg, true);
  prepare_out(cfg);
  OutputLock lock(cfg.out_dir);

  ImageDataset train_full = load_train(cfg);
  ImageDataset test_full = load_test(cfg);

  std::vector<RunRow> rows;
  json aggregates = json::array();
  for (Method m : cfg.eval.methods) {
    double sum_bal_acsa = 0.0, sum_bal_gm = 0.0, sum_bal_f1 = 0.0;
    double sum_imb_acsa = 0.0, sum_imb_gm = 0.0, sum_imb_f1 = 0.0;
    for (int rep = 0; rep < cfg.eval.repeats; ++rep) {
      ExperimentConfig ec;
      ec.method = m;
      ec.profile_counts = cfg.profile_counts;
      ec.balanced_test_counts = cfg.eval.balanced_test_counts;
      ec.imbalanced_test_counts = cfg.eval.imbalanced_test_counts;
      ec.train = cfg.train;
      ec.smote_k = cfg.smote_k;
      ec.clf = cfg.clf;
      ec.seed = cfg.seed + static_cast<uint64_t>(rep);  // paired across methods
      ExperimentResult r = run_experiment(train_full, test_full, ec);
      for (const MetricsReport* rep_report : {&r.balanced, &r.imbalanced}) {
        RunRow row;
        row.method = method_name(m);
        row.ratio = r.imbalance_ratio;
        row.seed = ec.seed;
        row.fold = 0;
        row.protocol = rep_report->protocol;
        row.report = *rep_report;
        rows.push_back(std::move(row));
      }
      sum_bal_acsa += r.balanced.acsa;
      sum_bal_gm += r.balanced.gm;
      sum_bal_f1 += r.balanced.macro_f1;
      sum_imb_acsa += r.imbalanced.acsa;
      sum_imb_gm += r.imbalanced.gm;
      sum_imb_f1 += r.imbalanced.macro_f1;
    }
    const double n = cfg.eval.repeats;
    aggregates.push_back(json{{"method", method_name(m)},
                              {"balanced",
                               {{"acsa", sum_bal_acsa / n},
                                {"gm", sum_bal_gm / n},
                                {"f1", sum_bal_f1 / n}}},
                              {"imbalanced",
                               {{"acsa", sum_imb_acsa / n},
                                {"gm", sum_imb_gm / n},
                                {"f1", sum_imb_f1 / n}}}});
  }

  write_runs_csv(cfg.out_dir + "/reports/metrics.csv", rows);
  {
    json j;
    j["reference_anchor"] = reference_anchor();
    j["aggregates"] = aggregates;
    json run_arr = json::array();
    for (const auto& row : rows) {
      json e = report_json(row.report);
      e["method"] = row.method;
      e["ratio"] = row.ratio;
      e["seed"] = row.seed;
      e["fold"] = row.fold;
      run_arr.push_back(e);
    }
    j["runs"] = run_arr;
    std::ofstream os(cfg.out_dir + "/reports/metrics.json", std::ios::trunc);
    os << j.dump(2) << '\n';
  }

  std::printf("%-12s %-11s %8s %8s %8s\n", "method", "protocol", "acsa", "gm", "f1");
  for (const auto& agg : aggregates) {
    for (const char* proto : {"balanced", "imbalanced"}) {
      std::printf("%-12s %-11s %8.4f %8.4f %8.4f\n",
                  agg["method"].get<std::string>().c_str(), proto,
                  agg[proto]["acsa"].get<double>(), agg[proto]["gm"].get<double>(),
                  agg[proto]["f1"].get<double>());
    }
  }

  write_manifest(cfg, "evaluate",
                 json{{"rows", rows.size()}, {"repeats", cfg.eval.repeats}});
}

void cmd_sweep(const RunConfig& cfg) {
  validate_dataset_paths(cfg, true);
  if (cfg.eval.ratios.empty()) throw ConfigError("eval.ratios", "ratio list is empty");
  prepare_out(cfg);
  OutputLock lock(cfg.out_dir);

  ImageDataset train_full = load_train(cfg);
  ImageDataset test_full = load_test(cfg);

  SweepConfig sc;
  sc.ratios = cfg.eval.ratios;
  sc.methods = cfg.eval.methods;
  sc.repetitions = cfg.eval.sweep_repetitions;
  sc.train_majority = cfg.eval.sweep_train_majority;
  sc.balanced_test_per_class = cfg.eval.sweep_balanced_test_per_class;
  sc.imbalanced_test_majority = cfg.eval.sweep_imbalanced_test_majority;
  sc.train = cfg.train;
  sc.smote_k = cfg.smote_k;
  sc.clf = cfg.clf;
  sc.seed = cfg.seed;
  SweepResult res = sweep(train_full, test_full, sc);

  write_runs_csv(cfg.out_dir + "/reports/sweep.csv", res.runs);
  {
    json j;
    json cells = json::array();
    for (const auto& c : res.cells) {
      cells.push_back(json{{"method", c.method},
                           {"ratio", c.ratio},
                           {"protocol", c.protocol},
                           {"acsa", {{"mean", c.mean_acsa}, {"sd", c.sd_acsa}}},
                           {"gm", {{"mean", c.mean_gm}, {"sd", c.sd_gm}}},
                           {"f1", {{"mean", c.mean_f1}, {"sd", c.sd_f1}}}});
    }
    j["cells"] = cells;
    j["trend_flags"] = res.trend_flags;
    std::ofstream os(cfg.out_dir + "/reports/sweep.json", std::ios::trunc);
    os << j.dump(2) << '\n';
  }

  struct MetricPick {
    const char* name;
    double SweepCell::*mean;
    double SweepCell::*sd;
  };
  const MetricPick picks[] = {
      {"acsa", &SweepCell::mean_acsa, &SweepCell::sd_acsa},
      {"gm", &SweepCell::mean_gm, &SweepCell::sd_gm},
      {"f1", &SweepCell::mean_f1, &SweepCell::sd_f1},
  };
  for (const auto& pick : picks) {
    for (const char* proto : {"balanced", "imbalanced"}) {
      std::vector<PlotSeries> series;
      for (Method m : sc.methods) {
        PlotSeries s;
        s.label = method_name(m);
        const MethodColor mc = color_of(s.label);
        s.r = mc.r;
        s.g = mc.g;
        s.b = mc.b;
        for (const auto& c : res.cells) {
          if (c.method != method_name(m) || c.protocol != proto) continue;
          s.x.push_back(c.ratio);
          s.y.push_back(c.*(pick.mean));
          s.band.push_back(c.*(pick.sd));
        }
        series.push_back(std::move(s));
      }
      const std::string path = cfg.out_dir + "/images/sweep_" + pick.name + "_" +
                               proto + ".png";
      write_line_plot(path, std::string(pick.name) + " (" + proto + ")",
                      "imbalance ratio", series);
    }
  }

  if (!res.trend_flags.empty()) {
    std::cout << "trend expectation violated:\n";
    for (const auto& f : res.trend_flags) std::cout << "  " << f << "\n";
  }
  write_manifest(cfg, "sweep",
                 json{{"rows", res.runs.size()},
                      {"cells", res.cells.size()},
                      {"trend_flags", res.trend_flags}});
}

}  // namespace dsmote
