#include <CLI11.hpp>
#include <iostream>

#include "dsmote/synth.hpp"

// Writes a deterministic MNIST-shaped glyph fixture (IDX train/test pair)
// for running the pipeline without the real datasets on disk.
int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic glyph dataset fixture"};
  std::string out_dir = "data";
  uint64_t seed = 7;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "fixture seed");
  CLI11_PARSE(app, argc, argv);

  try {
    dsmote::write_glyph_fixture(out_dir, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "fixture written to " << out_dir << "\n";
  return 0;
}
