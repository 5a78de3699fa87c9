#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsmote/tensor.hpp"

namespace dsmote {

// Trainable parameters, batch-norm running statistics and Adam optimizer
// state for one network. Entry order is fixed at registration time so
// traversal, updates and serialization are all deterministic.
struct ParamStore {
  struct Entry {
    std::string name;
    Tensor value;
    bool trainable = true;
  };

  std::vector<Entry> entries;
  // Adam moment buffers, indexed like `entries` (empty tensors for
  // non-trainable entries).
  std::vector<Tensor> adam_m, adam_v;
  uint64_t adam_t = 0;

  void add(std::string name, Tensor value, bool trainable);
  bool has(const std::string& name) const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  size_t size() const { return entries.size(); }

  std::vector<float> flat_trainable() const;

  // Flat binary checkpoint: magic "DSMW", version u32, then one record per
  // tensor (u32 name length, name bytes, u32 rank, u32 dims, raw
  // little-endian f32 data) until EOF. Adam state rides along under the
  // "adam." name prefix so a store round-trips completely.
  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  std::unordered_map<std::string, size_t> index_;
};

// Per-parameter gradients, aligned with the trainable entries of a store.
struct GradStore {
  std::vector<Tensor> grads;  // indexed like ParamStore::entries

  static GradStore zeros_like(const ParamStore& store);
  Tensor& for_entry(size_t i) { return grads[i]; }
  // this += scale * other
  void axpy(double scale, const GradStore& other);
  bool all_finite() const;
};

// Standard Adam with bias correction; one call advances the shared
// timestep and updates every trainable entry. Throws NumericError on
// non-finite gradients before touching any parameter.
void adam_step(ParamStore& store, const GradStore& grads, double lr, double beta1,
               double beta2, double eps);

}  // namespace dsmote
