#include "dsmote/config.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dsmote/dataset.hpp"
#include "dsmote/error.hpp"

namespace dsmote {

using nlohmann::json;

namespace {

std::string join(const std::string& parent, const char* key) {
  return parent.empty() ? key : parent + "." + key;
}

const char* type_name(const json& j) {
  switch (j.type()) {
    case json::value_t::string: return "string";
    case json::value_t::boolean: return "boolean";
    case json::value_t::array: return "array";
    case json::value_t::object: return "object";
    case json::value_t::null: return "null";
    default: return j.is_number() ? "number" : "value";
  }
}

template <typename T>
T fetch(const json& obj, const std::string& parent, const char* key, const T* fallback) {
  const std::string path = join(parent, key);
  if (!obj.is_object()) throw ConfigError(parent, "expected an object");
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(path, "missing required field");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path, std::string("wrong type (got ") + type_name(obj.at(key)) + ")");
  }
}

template <typename T>
T req(const json& obj, const std::string& parent, const char* key) {
  return fetch<T>(obj, parent, key, nullptr);
}

template <typename T>
T opt(const json& obj, const std::string& parent, const char* key, const T& def) {
  if (!obj.is_object()) return def;
  return fetch<T>(obj, parent, key, &def);
}

std::vector<size_t> desk_imbalanced_test() {
  std::vector<size_t> v;
  for (size_t c : mnist_imbalanced_test()) v.push_back(std::max<size_t>(1, c / 10));
  return v;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");

  RunConfig cfg;
  if (j.contains("seed")) {
    cfg.seed = req<uint64_t>(j, "", "seed");
    cfg.seed_set = true;
  }
  cfg.out_dir = opt<std::string>(j, "", "out", "");

  {
    const json& d = j.contains("dataset") ? j.at("dataset") : json::object();
    if (j.contains("dataset") && !d.is_object())
      throw ConfigError("dataset", "expected an object");
    cfg.dataset.train_images = opt<std::string>(d, "dataset", "train_images", "");
    cfg.dataset.train_labels = opt<std::string>(d, "dataset", "train_labels", "");
    cfg.dataset.test_images = opt<std::string>(d, "dataset", "test_images", "");
    cfg.dataset.test_labels = opt<std::string>(d, "dataset", "test_labels", "");
  }

  cfg.method = method_from_name(opt<std::string>(j, "", "method", "deep_smote"));

  cfg.profile_counts = desk_counts(mnist_train_profile());
  if (j.contains("profile")) {
    const json& p = j.at("profile");
    if (!p.is_object()) throw ConfigError("profile", "expected an object");
    cfg.profile_counts =
        opt<std::vector<size_t>>(p, "profile", "counts", cfg.profile_counts);
    cfg.profile_class_order =
        opt<std::vector<int32_t>>(p, "profile", "class_order", {});
    for (size_t c : cfg.profile_counts)
      if (c < 1) throw ConfigError("profile.counts", "all counts must be >= 1");
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    if (!t.is_object()) throw ConfigError("train", "expected an object");
    cfg.train.latent_dim = opt<int>(t, "train", "latent_dim", cfg.train.latent_dim);
    cfg.train.lr = opt<double>(t, "train", "lr", cfg.train.lr);
    cfg.train.beta1 = opt<double>(t, "train", "beta1", cfg.train.beta1);
    cfg.train.beta2 = opt<double>(t, "train", "beta2", cfg.train.beta2);
    cfg.train.batch_size = opt<int>(t, "train", "batch_size", cfg.train.batch_size);
    cfg.train.epochs = opt<int>(t, "train", "epochs", cfg.train.epochs);
    cfg.train.penalty_weight =
        opt<double>(t, "train", "penalty_weight", cfg.train.penalty_weight);
    cfg.train.width = opt<int>(t, "train", "width", cfg.train.width);
    cfg.train.plateau_patience =
        opt<int>(t, "train", "plateau_patience", cfg.train.plateau_patience);
    cfg.train.permutation = opt<bool>(t, "train", "random_permutation", false)
                                ? PenaltyPermutation::random
                                : PenaltyPermutation::shift1;
  }
  cfg.train.validate();

  if (j.contains("smote")) {
    cfg.smote_k = opt<int>(j.at("smote"), "smote", "k", cfg.smote_k);
    if (cfg.smote_k < 1) throw ConfigError("smote.k", "must be >= 1");
  }

  if (j.contains("plan")) {
    const json& p = j.at("plan");
    if (!p.is_object()) throw ConfigError("plan", "expected an object");
    cfg.plan_counts = opt<std::vector<size_t>>(p, "plan", "synthetic_counts", {});
  }

  if (j.contains("classifier")) {
    const json& c = j.at("classifier");
    if (!c.is_object()) throw ConfigError("classifier", "expected an object");
    cfg.clf.epochs = opt<int>(c, "classifier", "epochs", cfg.clf.epochs);
    cfg.clf.batch_size = opt<int>(c, "classifier", "batch_size", cfg.clf.batch_size);
    cfg.clf.lr = opt<double>(c, "classifier", "lr", cfg.clf.lr);
    cfg.clf.hidden = opt<int>(c, "classifier", "hidden", cfg.clf.hidden);
    if (cfg.clf.epochs < 1) throw ConfigError("classifier.epochs", "must be >= 1");
  }

  cfg.eval.balanced_test_counts.assign(10, 120);
  cfg.eval.imbalanced_test_counts = desk_imbalanced_test();
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    if (!e.is_object()) throw ConfigError("eval", "expected an object");
    if (e.contains("methods")) {
      cfg.eval.methods.clear();
      for (const auto& m : req<std::vector<std::string>>(e, "eval", "methods"))
        cfg.eval.methods.push_back(method_from_name(m));
      if (cfg.eval.methods.empty())
        throw ConfigError("eval.methods", "method list is empty");
    }
    cfg.eval.repeats = opt<int>(e, "eval", "repeats", cfg.eval.repeats);
    if (cfg.eval.repeats < 1) throw ConfigError("eval.repeats", "must be >= 1");
    cfg.eval.balanced_test_counts = opt<std::vector<size_t>>(
        e, "eval", "balanced_test_counts", cfg.eval.balanced_test_counts);
    cfg.eval.imbalanced_test_counts = opt<std::vector<size_t>>(
        e, "eval", "imbalanced_test_counts", cfg.eval.imbalanced_test_counts);
    cfg.eval.ratios = opt<std::vector<double>>(e, "eval", "ratios", cfg.eval.ratios);
    cfg.eval.sweep_repetitions =
        opt<int>(e, "eval", "sweep_repetitions", cfg.eval.sweep_repetitions);
    cfg.eval.sweep_train_majority = opt<size_t>(e, "eval", "sweep_train_majority",
                                                cfg.eval.sweep_train_majority);
    cfg.eval.sweep_balanced_test_per_class =
        opt<size_t>(e, "eval", "sweep_balanced_test_per_class",
                    cfg.eval.sweep_balanced_test_per_class);
    cfg.eval.sweep_imbalanced_test_majority =
        opt<size_t>(e, "eval", "sweep_imbalanced_test_majority",
                    cfg.eval.sweep_imbalanced_test_majority);
  }

  cfg.checkpoint_dir = opt<std::string>(j, "", "checkpoint_dir", "");
  return cfg;
}

void validate_dataset_paths(const RunConfig& cfg, bool needs_test) {
  auto check = [](const std::string& path, const char* field) {
    if (path.empty()) throw ConfigError(field, "missing required field");
    if (!std::filesystem::exists(path))
      throw ConfigError(field, "path '" + path + "' does not exist");
  };
  check(cfg.dataset.train_images, "dataset.train_images");
  check(cfg.dataset.train_labels, "dataset.train_labels");
  if (needs_test) {
    check(cfg.dataset.test_images, "dataset.test_images");
    check(cfg.dataset.test_labels, "dataset.test_labels");
  }
}

std::string RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["out"] = out_dir;
  j["dataset"] = {{"train_images", dataset.train_images},
                  {"train_labels", dataset.train_labels},
                  {"test_images", dataset.test_images},
                  {"test_labels", dataset.test_labels}};
  j["method"] = method_name(method);
  j["profile"] = {{"counts", profile_counts}};
  if (!profile_class_order.empty()) j["profile"]["class_order"] = profile_class_order;
  j["train"] = {{"latent_dim", train.latent_dim},
                {"lr", train.lr},
                {"batch_size", train.batch_size},
                {"epochs", train.epochs},
                {"penalty_weight", train.penalty_weight},
                {"width", train.width},
                {"random_permutation", train.permutation == PenaltyPermutation::random}};
  j["smote"] = {{"k", smote_k}};
  if (!plan_counts.empty()) j["plan"] = {{"synthetic_counts", plan_counts}};
  j["classifier"] = {{"epochs", clf.epochs},
                     {"batch_size", clf.batch_size},
                     {"lr", clf.lr},
                     {"hidden", clf.hidden}};
  std::vector<std::string> method_names;
  for (Method m : eval.methods) method_names.emplace_back(method_name(m));
  j["eval"] = {{"methods", method_names},
               {"repeats", eval.repeats},
               {"balanced_test_counts", eval.balanced_test_counts},
               {"imbalanced_test_counts", eval.imbalanced_test_counts},
               {"ratios", eval.ratios},
               {"sweep_repetitions", eval.sweep_repetitions},
               {"sweep_train_majority", eval.sweep_train_majority},
               {"sweep_balanced_test_per_class", eval.sweep_balanced_test_per_class},
               {"sweep_imbalanced_test_majority", eval.sweep_imbalanced_test_majority}};
  if (!checkpoint_dir.empty()) j["checkpoint_dir"] = checkpoint_dir;
  return j.dump(2);
}

}  // namespace dsmote
