#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dsmote/models.hpp"
#include "dsmote/network.hpp"

using namespace dsmote;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("network spec JSON round-trip") {
  const NetworkSpec enc = encoder_spec(1, 32, 16, 24);
  const NetworkSpec back = NetworkSpec::from_json(enc.to_json());
  REQUIRE(back.layers.size() == enc.layers.size());
  CHECK(back.input_shape == enc.input_shape);
  const auto a = enc.type_check();
  const auto b = back.type_check();
  CHECK(a == b);
}

TEST_CASE("checkpoint: DSMW header and round-trip") {
  const NetworkSpec spec = encoder_spec(1, 32, 4, 8);
  Rng rng(17);
  ParamStore store = init_params(spec, rng);
  // give the store some optimizer state so that round-trips cover it
  GradStore g = GradStore::zeros_like(store);
  for (auto& t : g.grads)
    for (auto& v : t.data) v = 0.01f;
  adam_step(store, g, 0.001, 0.9, 0.999, 1e-8);

  const std::string path = temp_path("dsmote_ckpt_test.dsmw");
  store.save(path);

  const auto bytes = slurp(path);
  REQUIRE(bytes.size() > 8);
  CHECK(bytes[0] == 'D');
  CHECK(bytes[1] == 'S');
  CHECK(bytes[2] == 'M');
  CHECK(bytes[3] == 'W');
  // version u32 little-endian = 1
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);

  ParamStore loaded = ParamStore::load(path);
  REQUIRE(loaded.entries.size() == store.entries.size());
  CHECK(loaded.adam_t == store.adam_t);
  for (size_t i = 0; i < store.entries.size(); ++i) {
    CHECK(loaded.entries[i].name == store.entries[i].name);
    CHECK(loaded.entries[i].value.shape == store.entries[i].value.shape);
    CHECK(loaded.entries[i].value.data == store.entries[i].value.data);
  }
  for (size_t i = 0; i < store.entries.size(); ++i) {
    if (!store.entries[i].trainable) continue;
    CHECK(loaded.adam_m[i].data == store.adam_m[i].data);
    CHECK(loaded.adam_v[i].data == store.adam_v[i].data);
  }

  // second save is byte-identical
  const std::string path2 = temp_path("dsmote_ckpt_test2.dsmw");
  loaded.save(path2);
  CHECK(slurp(path2) == bytes);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("checkpoint: bad magic rejected") {
  const std::string path = temp_path("dsmote_ckpt_bad.dsmw");
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOPE";
  }
  CHECK_THROWS_AS(ParamStore::load(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
  // a few optimizer steps on a small net, run twice from the same seed
  auto run = [] {
    NetworkSpec spec;
    spec.input_shape = {2, 8, 8};
    spec.layers.push_back(LayerSpec::conv(2, 4, 3, 1, 1));
    spec.layers.push_back(LayerSpec::batchnorm(4));
    spec.layers.push_back(LayerSpec::leaky(0.2f));
    spec.layers.push_back(LayerSpec::flatten_());
    spec.layers.push_back(LayerSpec::linear_(4 * 8 * 8, 5));
    Rng rng(77);
    ParamStore params = init_params(spec, rng);
    for (int step = 0; step < 5; ++step) {
      Tensor in({4, 2, 8, 8});
      for (auto& v : in.data) v = rng.uniform_f() * 2.0f - 1.0f;
      Tensor target({4, 5});
      for (auto& v : target.data) v = rng.uniform_f();
      ForwardCache cache;
      Tensor out = forward(spec, params, in, Mode::train, &cache);
      auto [loss, grad] = mse_loss(out, target);
      (void)loss;
      GradStore grads = GradStore::zeros_like(params);
      backward(spec, params, cache, grad, grads);
      adam_step(params, grads, 0.001, 0.9, 0.999, 1e-8);
    }
    return params;
  };
  ParamStore a = run();
  ParamStore b = run();
  REQUIRE(a.entries.size() == b.entries.size());
  for (size_t i = 0; i < a.entries.size(); ++i)
    CHECK(a.entries[i].value.data == b.entries[i].value.data);
}
