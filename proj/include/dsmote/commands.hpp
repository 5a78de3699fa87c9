#pragma once

#include "dsmote/config.hpp"

namespace dsmote {

// Batch subcommands behind the CLI. All write into cfg.out_dir using the
// fixed layout (checkpoints/, reports/, images/, manifest.json) and throw
// the usual error taxonomy; main() maps exceptions to exit codes.
void cmd_train(const RunConfig& cfg);
void cmd_generate(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_sweep(const RunConfig& cfg);

}  // namespace dsmote
