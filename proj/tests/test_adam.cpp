#include <doctest.h>

#include <cmath>

#include "dsmote/params.hpp"
#include "dsmote/rng.hpp"

using namespace dsmote;

namespace {

ParamStore scalar_store(float value) {
  ParamStore s;
  s.add("theta", Tensor({1}, {value}), true);
  return s;
}

}  // namespace

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  ParamStore s = scalar_store(0.75f);
  GradStore g = GradStore::zeros_like(s);
  adam_step(s, g, 0.01, 0.9, 0.999, 1e-8);
  CHECK(s.at("theta").data[0] == 0.75f);
  CHECK(s.adam_t == 1);
}

TEST_CASE("adam: first bias-corrected step has magnitude ~lr") {
  ParamStore s = scalar_store(0.0f);
  GradStore g = GradStore::zeros_like(s);
  g.grads[0].data[0] = 1.0f;
  adam_step(s, g, 0.0002, 0.9, 0.999, 1e-8);
  // mhat = vhat = 1 at t=1, so the step is lr/(1+eps)
  CHECK(s.at("theta").data[0] == doctest::Approx(-0.0002).epsilon(1e-4));
}

TEST_CASE("adam: identical parameters receive identical updates") {
  ParamStore s;
  s.add("a", Tensor({2}, {0.3f, 0.3f}), true);
  GradStore g = GradStore::zeros_like(s);
  g.grads[0].data = {0.7f, 0.7f};
  for (int i = 0; i < 5; ++i) adam_step(s, g, 0.01, 0.9, 0.999, 1e-8);
  CHECK(s.at("a").data[0] == s.at("a").data[1]);
}

TEST_CASE("adam: non-finite gradient fails fast") {
  ParamStore s = scalar_store(1.0f);
  GradStore g = GradStore::zeros_like(s);
  g.grads[0].data[0] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(adam_step(s, g, 0.01, 0.9, 0.999, 1e-8), NumericError);
  // fail fast: parameter and timestep untouched
  CHECK(s.at("theta").data[0] == 1.0f);
  CHECK(s.adam_t == 0);
}

TEST_CASE("adam: timestep strictly increments") {
  ParamStore s = scalar_store(0.0f);
  GradStore g = GradStore::zeros_like(s);
  for (uint64_t i = 1; i <= 7; ++i) {
    g.grads[0].data[0] = 0.1f;
    adam_step(s, g, 0.01, 0.9, 0.999, 1e-8);
    CHECK(s.adam_t == i);
  }
}

TEST_CASE("adam: converges to the minimizer of a scalar quadratic") {
  // f(theta) = (theta - 0.3)^2, grad = 2(theta - 0.3)
  ParamStore s = scalar_store(-1.5f);
  GradStore g = GradStore::zeros_like(s);
  for (int i = 0; i < 1000; ++i) {
    const float theta = s.at("theta").data[0];
    g.grads[0].data[0] = 2.0f * (theta - 0.3f);
    adam_step(s, g, 0.05, 0.9, 0.999, 1e-8);
  }
  CHECK(std::abs(s.at("theta").data[0] - 0.3f) <= 1e-3);
}
