#include <CLI11.hpp>
#include <iostream>

#include "dsmote/commands.hpp"
#include "dsmote/error.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  uint64_t seed_override = 0;
  bool seed_given = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "JSON run configuration")->required();
  sub->add_option("--seed", args.seed_override, "master seed (overrides config)")
      ->each([&](const std::string&) { args.seed_given = true; });
  sub->add_option("--out", args.out_override, "output directory (overrides config)");
}

dsmote::RunConfig load(const CommonArgs& args) {
  dsmote::RunConfig cfg = dsmote::load_run_config(args.config_path);
  if (args.seed_given) {
    cfg.seed = args.seed_override;
    cfg.seed_set = true;
  }
  if (!args.out_override.empty()) cfg.out_dir = args.out_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeepSMOTE batch experiment runner"};
  app.require_subcommand(1);

  CommonArgs train_args, gen_args, eval_args, sweep_args;
  std::string checkpoint_override;

  CLI::App* train = app.add_subcommand("train", "train the encoder/decoder pair");
  add_common(train, train_args);
  CLI::App* gen = app.add_subcommand("generate", "balance a dataset with latent SMOTE");
  add_common(gen, gen_args);
  gen->add_option("--checkpoint", checkpoint_override,
                  "checkpoint directory (overrides config)");
  CLI::App* eval = app.add_subcommand("evaluate", "run the two-protocol evaluation");
  add_common(eval, eval_args);
  CLI::App* swp = app.add_subcommand("sweep", "imbalance-ratio robustness sweep");
  add_common(swp, sweep_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      dsmote::cmd_train(load(train_args));
    } else if (gen->parsed()) {
      dsmote::RunConfig cfg = load(gen_args);
      if (!checkpoint_override.empty()) cfg.checkpoint_dir = checkpoint_override;
      dsmote::cmd_generate(cfg);
    } else if (eval->parsed()) {
      dsmote::cmd_evaluate(load(eval_args));
    } else if (swp->parsed()) {
      dsmote::cmd_sweep(load(sweep_args));
    }
  } catch (const dsmote::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dsmote::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const dsmote::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const dsmote::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
