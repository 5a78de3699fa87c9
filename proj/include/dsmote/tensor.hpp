#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dsmote/error.hpp"

namespace dsmote {

// Dense row-major float tensor. The single numeric currency of the NN
// core: image batches, feature maps and latent vectors all live here.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), 0.0f);
  }
  Tensor(std::vector<int> s, std::vector<float> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (numel_of(shape) != data.size())
      throw ShapeError("tensor data size does not match shape " + shape_str(shape));
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

  static Tensor full(std::vector<int> s, float v) {
    Tensor t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }

  static size_t numel_of(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) {
      if (d <= 0) throw ShapeError("non-positive dimension in shape " + shape_str(s));
      n *= static_cast<size_t>(d);
    }
    return n;
  }

  static std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(s[i]);
    }
    return out + "]";
  }

  size_t numel() const { return data.size(); }
  float* ptr() { return data.data(); }
  const float* ptr() const { return data.data(); }

  int dim(size_t i) const { return shape.at(i); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (float v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  // Reshape without copying; total element count must be preserved.
  Tensor reshaped(std::vector<int> s) const {
    if (numel_of(s) != data.size())
      throw ShapeError("cannot reshape " + shape_str(shape) + " to " + shape_str(s));
    Tensor t;
    t.shape = std::move(s);
    t.data = data;
    return t;
  }
};

}  // namespace dsmote
