#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>

#include "dsmote/dataset.hpp"
#include "dsmote/synth.hpp"

using namespace dsmote;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string base =
      (fs::temp_directory_path() / ("dsmote_cli_" + std::to_string(counter++))).string();
  const std::string cmd = std::string(DEEPSMOTE_BIN) + " " + args + " >" + base +
                          ".out 2>" + base + ".err";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(base + ".out");
  r.err = slurp(base + ".err");
  std::remove((base + ".out").c_str());
  std::remove((base + ".err").c_str());
  return r;
}

// Shared fixture + scratch space for the CLI runs.
struct CliWorld {
  fs::path root;
  std::string train_images, train_labels, test_images, test_labels;

  CliWorld() {
    root = fs::temp_directory_path() / "dsmote_cli_world";
    fs::remove_all(root);
    fs::create_directories(root);
    ImageDataset train =
        make_glyph_dataset(std::vector<size_t>(10, 450), 31, "train");
    ImageDataset test = make_glyph_dataset(std::vector<size_t>(10, 60), 32, "test");
    train_images = (root / "train-images-idx3-ubyte").string();
    train_labels = (root / "train-labels-idx1-ubyte").string();
    test_images = (root / "t10k-images-idx3-ubyte").string();
    test_labels = (root / "t10k-labels-idx1-ubyte").string();
    save_idx(train, train_images, train_labels);
    save_idx(test, test_images, test_labels);
  }

  json base_config() const {
    json j;
    j["seed"] = 5;
    j["dataset"] = {{"train_images", train_images},
                    {"train_labels", train_labels},
                    {"test_images", test_images},
                    {"test_labels", test_labels}};
    // tiny-but-real settings so CLI runs finish in seconds
    j["train"] = {{"latent_dim", 300}, {"lr", 0.0002}, {"batch_size", 32},
                  {"epochs", 2},       {"width", 4}};
    j["classifier"] = {{"epochs", 1}, {"batch_size", 32}, {"hidden", 16}};
    j["eval"] = {{"methods", {"none", "pixel_smote"}},
                 {"repeats", 2},
                 {"balanced_test_counts", json::array({20, 20, 20, 20, 20, 20, 20, 20, 20, 20})},
                 {"imbalanced_test_counts", json::array({20, 10, 5, 4, 3, 2, 2, 1, 1, 1})}};
    return j;
  }

  std::string write_config(const json& j, const std::string& name) const {
    const std::string path = (root / name).string();
    std::ofstream os(path);
    os << j.dump(2);
    return path;
  }

  std::string out_dir(const std::string& name) const { return (root / name).string(); }
};

CliWorld& world() {
  static CliWorld w;
  return w;
}

}  // namespace

TEST_CASE("cli: missing dataset path exits 2 and names the field") {
  json cfg = world().base_config();
  cfg["dataset"].erase("train_images");
  const std::string path = world().write_config(cfg, "missing.json");
  CliResult r = run_cli("train --config " + path + " --out " + world().out_dir("m1"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("dataset.train_images") != std::string::npos);
}

TEST_CASE("cli: unreadable IDX data exits 3") {
  json cfg = world().base_config();
  const std::string bogus = (world().root / "bogus.idx").string();
  {
    std::ofstream os(bogus, std::ios::binary);
    os << "not an idx file";
  }
  cfg["dataset"]["train_images"] = bogus;
  const std::string path = world().write_config(cfg, "badidx.json");
  CliResult r = run_cli("train --config " + path + " --out " + world().out_dir("m2"));
  CHECK(r.exit_code == 3);
}

TEST_CASE("cli: missing seed exits 2 naming the field") {
  json cfg = world().base_config();
  cfg.erase("seed");
  const std::string path = world().write_config(cfg, "noseed.json");
  CliResult r = run_cli("train --config " + path + " --out " + world().out_dir("m3"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("seed") != std::string::npos);
}

TEST_CASE("cli: train writes checkpoints, loss history and a manifest; reruns are byte-identical") {
  const std::string cfg_path = world().write_config(world().base_config(), "train.json");
  const std::string out1 = world().out_dir("t1");
  const std::string out2 = world().out_dir("t2");

  CliResult r1 = run_cli("train --config " + cfg_path + " --out " + out1);
  REQUIRE(r1.exit_code == 0);
  CHECK(fs::exists(out1 + "/checkpoints/encoder.dsmw"));
  CHECK(fs::exists(out1 + "/checkpoints/decoder.dsmw"));
  CHECK(fs::exists(out1 + "/reports/loss_history.csv"));
  CHECK(!fs::exists(out1 + "/.lock"));  // lock released

  json manifest = json::parse(slurp(out1 + "/manifest.json"));
  CHECK(manifest["latent_dim"] == 300);
  CHECK(manifest["lr"] == 0.0002);

  CliResult r2 = run_cli("train --config " + cfg_path + " --out " + out2);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(out1 + "/checkpoints/encoder.dsmw") ==
        slurp(out2 + "/checkpoints/encoder.dsmw"));
  CHECK(slurp(out1 + "/checkpoints/decoder.dsmw") ==
        slurp(out2 + "/checkpoints/decoder.dsmw"));
  CHECK(slurp(out1 + "/reports/loss_history.csv") ==
        slurp(out2 + "/reports/loss_history.csv"));
}

TEST_CASE("cli: locked output directory is refused") {
  const std::string cfg_path = world().write_config(world().base_config(), "lock.json");
  const std::string out = world().out_dir("locked");
  fs::create_directories(out);
  {
    std::ofstream os(out + "/.lock");
  }
  CliResult r = run_cli("train --config " + cfg_path + " --out " + out);
  CHECK(r.exit_code == 3);
  fs::remove(out + "/.lock");
}

TEST_CASE("cli: generate balances the desk profile and emits one grid per minority class") {
  // checkpoint produced by the train test above (same config/seed)
  const std::string ckpt = world().out_dir("t1") + "/checkpoints";
  if (!fs::exists(ckpt + "/encoder.dsmw")) {
    const std::string cfg_path =
        world().write_config(world().base_config(), "train.json");
    REQUIRE(run_cli("train --config " + cfg_path + " --out " + world().out_dir("t1"))
                .exit_code == 0);
  }
  json cfg = world().base_config();
  const std::string cfg_path = world().write_config(cfg, "gen.json");
  const std::string out = world().out_dir("gen");
  CliResult r = run_cli("generate --config " + cfg_path + " --checkpoint " + ckpt +
                        " --out " + out);
  REQUIRE(r.exit_code == 0);

  ImageDataset aug = load_idx(out + "/images/augmented-images-idx3-ubyte",
                              out + "/images/augmented-labels-idx1-ubyte");
  CHECK(aug.histogram() == std::vector<size_t>(10, 400));
  for (int c = 1; c <= 9; ++c)
    CHECK(fs::exists(out + "/images/class_" + std::to_string(c) + ".png"));
  CHECK(!fs::exists(out + "/images/class_0.png"));  // majority got no synthetics
  CHECK(fs::exists(out + "/images/augmented.json"));
}

TEST_CASE("cli: generate with an already-balanced profile changes nothing and emits no grids") {
  const std::string ckpt = world().out_dir("t1") + "/checkpoints";
  json cfg = world().base_config();
  cfg["profile"] = {{"counts", json::array({50, 50, 50, 50, 50, 50, 50, 50, 50, 50})}};
  const std::string cfg_path = world().write_config(cfg, "gen_flat.json");
  const std::string out = world().out_dir("gen_flat");
  CliResult r = run_cli("generate --config " + cfg_path + " --checkpoint " + ckpt +
                        " --out " + out);
  REQUIRE(r.exit_code == 0);
  ImageDataset aug = load_idx(out + "/images/augmented-images-idx3-ubyte",
                              out + "/images/augmented-labels-idx1-ubyte");
  CHECK(aug.histogram() == std::vector<size_t>(10, 50));
  for (int c = 0; c <= 9; ++c)
    CHECK(!fs::exists(out + "/images/class_" + std::to_string(c) + ".png"));
}

TEST_CASE("cli: generate rejects a checkpoint that mismatches the configured architecture") {
  const std::string ckpt = world().out_dir("t1") + "/checkpoints";
  json cfg = world().base_config();
  cfg["train"]["width"] = 8;  // checkpoint was trained at width 4
  const std::string cfg_path = world().write_config(cfg, "gen_bad.json");
  CliResult r = run_cli("generate --config " + cfg_path + " --checkpoint " + ckpt +
                        " --out " + world().out_dir("gen_bad"));
  CHECK(r.exit_code == 3);
}

TEST_CASE("cli: evaluate emits the exact CSV contract and is byte-deterministic") {
  json cfg = world().base_config();
  // small but real: two methods, two repeats
  const std::string cfg_path = world().write_config(cfg, "eval.json");
  const std::string out1 = world().out_dir("e1");
  const std::string out2 = world().out_dir("e2");
  CliResult r1 = run_cli("evaluate --config " + cfg_path + " --out " + out1);
  REQUIRE(r1.exit_code == 0);

  const std::string csv = slurp(out1 + "/reports/metrics.csv");
  CHECK(csv.rfind("method,ratio,seed,fold,protocol,acsa,gm,f1\n", 0) == 0);

  // paired design: both methods carry the same seed/fold columns
  std::set<std::string> none_keys, pixel_keys;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    const auto c1 = line.find(',');
    const std::string method = line.substr(0, c1);
    // seed,fold columns
    size_t p = c1 + 1;
    p = line.find(',', p) + 1;  // skip ratio
    const size_t seed_end = line.find(',', p);
    const size_t fold_end = line.find(',', seed_end + 1);
    const std::string key = line.substr(p, fold_end - p);
    (method == "none" ? none_keys : pixel_keys).insert(key);
  }
  CHECK(none_keys == pixel_keys);
  CHECK(!none_keys.empty());

  json metrics = json::parse(slurp(out1 + "/reports/metrics.json"));
  CHECK(metrics.contains("reference_anchor"));
  CHECK(metrics["reference_anchor"]["acsa"] == 96.16);
  CHECK(metrics["reference_anchor"]["gm"] == 98.11);
  CHECK(metrics["reference_anchor"]["f1"] == 96.44);

  CliResult r2 = run_cli("evaluate --config " + cfg_path + " --out " + out2);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(out1 + "/reports/metrics.csv") == slurp(out2 + "/reports/metrics.csv"));
  CHECK(slurp(out1 + "/reports/metrics.json") == slurp(out2 + "/reports/metrics.json"));
}

TEST_CASE("cli: sweep emits ordered rows, zero-width bands for R=1 and plots") {
  json cfg = world().base_config();
  cfg["eval"]["methods"] = {"none"};
  cfg["eval"]["ratios"] = {20, 50, 100};
  cfg["eval"]["sweep_repetitions"] = 1;
  cfg["eval"]["sweep_train_majority"] = 50;
  cfg["eval"]["sweep_balanced_test_per_class"] = 15;
  cfg["eval"]["sweep_imbalanced_test_majority"] = 15;
  const std::string cfg_path = world().write_config(cfg, "sweep.json");
  const std::string out = world().out_dir("sw1");
  CliResult r = run_cli("sweep --config " + cfg_path + " --out " + out);
  REQUIRE(r.exit_code == 0);

  const std::string csv = slurp(out + "/reports/sweep.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "method,ratio,seed,fold,protocol,acsa,gm,f1");
  size_t rows = 0;
  double last_ratio = 0.0;
  while (std::getline(lines, line)) {
    rows++;
    const auto c1 = line.find(',');
    const double ratio = std::stod(line.substr(c1 + 1));
    CHECK(ratio >= last_ratio);
    last_ratio = ratio;
  }
  CHECK(rows == 3 * 1 * 1 * 2);  // ratios x methods x reps x protocols

  json sj = json::parse(slurp(out + "/reports/sweep.json"));
  for (const auto& cell : sj["cells"]) {
    CHECK(cell["acsa"]["sd"] == 0.0);
  }
  CHECK(sj.contains("trend_flags"));
  for (const char* m : {"acsa", "gm", "f1"}) {
    CHECK(fs::exists(out + "/images/sweep_" + std::string(m) + "_balanced.png"));
    CHECK(fs::exists(out + "/images/sweep_" + std::string(m) + "_imbalanced.png"));
  }
}

TEST_CASE("cli: sweep accepts the ratio range endpoints 20 and 400") {
  json cfg = world().base_config();
  cfg["eval"]["methods"] = {"none"};
  cfg["eval"]["ratios"] = {20, 400};
  cfg["eval"]["sweep_repetitions"] = 1;
  cfg["eval"]["sweep_train_majority"] = 400;
  cfg["eval"]["sweep_balanced_test_per_class"] = 10;
  cfg["eval"]["sweep_imbalanced_test_majority"] = 10;
  cfg["classifier"]["epochs"] = 1;
  const std::string cfg_path = world().write_config(cfg, "sweep_ends.json");
  const std::string out = world().out_dir("sw2");
  CliResult r = run_cli("sweep --config " + cfg_path + " --out " + out);
  CHECK(r.exit_code == 0);
}
