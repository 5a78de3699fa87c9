#include "dsmote/smote.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "dsmote/kernels.hpp"
#include "dsmote/rng.hpp"

namespace dsmote {

void LabeledVectors::push_row(const float* v, int32_t label) {
  data.insert(data.end(), v, v + dim);
  labels.push_back(label);
}

void LabeledVectors::validate() const {
  if (dim < 1) throw ShapeError("LabeledVectors: dimension must be >= 1");
  if (data.size() != labels.size() * static_cast<size_t>(dim))
    throw ShapeError("LabeledVectors: data size does not match N x D");
  for (float v : data)
    if (!std::isfinite(v)) throw NumericError("LabeledVectors: non-finite value");
}

ClassNeighbors knn_within_class(const LabeledVectors& data, int32_t class_id, int k) {
  if (k < 1) throw ShapeError("knn_within_class: k must be >= 1");
  ClassNeighbors out;
  for (size_t i = 0; i < data.count(); ++i)
    if (data.labels[i] == class_id) out.members.push_back(static_cast<uint32_t>(i));
  const size_t m = out.members.size();
  if (m < 2)
    throw DataError("knn_within_class: class " + std::to_string(class_id) +
                    " has fewer than 2 members");

  // Gather the class into a compact matrix; all-pairs distances.
  std::vector<float> pts(m * static_cast<size_t>(data.dim));
  for (size_t i = 0; i < m; ++i)
    std::copy_n(data.row(out.members[i]), data.dim, pts.data() + i * data.dim);
  std::vector<double> dist(m * m);
  kernels::sqdist_matrix(static_cast<int>(m), data.dim, pts.data(), dist.data());

  const size_t kk = std::min<size_t>(static_cast<size_t>(k), m - 1);
  out.neighbors.resize(m);
  std::vector<std::pair<double, uint32_t>> order(m - 1);
  for (size_t i = 0; i < m; ++i) {
    size_t w = 0;
    for (size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      order[w++] = {dist[i * m + j], out.members[j]};
    }
    // ties broken by lower global index
    std::sort(order.begin(), order.end());
    out.neighbors[i].resize(kk);
    for (size_t j = 0; j < kk; ++j) out.neighbors[i][j] = order[j].second;
  }
  return out;
}

std::vector<float> interpolate(const std::vector<float>& x,
                               const std::vector<float>& neighbor, double u) {
  if (x.size() != neighbor.size())
    throw ShapeError("interpolate: dimension mismatch");
  if (u < 0.0 || u > 1.0) throw ShapeError("interpolate: u must be in [0,1]");
  std::vector<float> out(x.size());
  const float uf = static_cast<float>(u);
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] + uf * (neighbor[i] - x[i]);
  return out;
}

LabeledVectors oversample(const LabeledVectors& data, const SmoteConfig& cfg) {
  data.validate();
  std::map<int32_t, size_t> current;
  for (int32_t l : data.labels) current[l]++;

  LabeledVectors synth;
  synth.dim = data.dim;
  for (const auto& [cls, target] : cfg.targets) {
    const size_t have = current.count(cls) ? current[cls] : 0;
    if (target < have)
      throw DataError("oversample: target " + std::to_string(target) + " for class " +
                      std::to_string(cls) + " is below current count " +
                      std::to_string(have));
    const size_t need = target - have;
    if (need == 0) continue;
    if (have == 0)
      throw DataError("oversample: class " + std::to_string(cls) + " has no members");

    Rng rng = derive_rng(cfg.seed, "smote.class" + std::to_string(cls));
    if (have == 1) {
      // Interpolation is impossible; replicate the lone instance.
      std::cerr << "[smote] warning: class " << cls << " has a single member; "
                << "replicating it " << need << "x\n";
      size_t lone = 0;
      for (size_t i = 0; i < data.count(); ++i)
        if (data.labels[i] == cls) lone = i;
      for (size_t s = 0; s < need; ++s) synth.push_row(data.row(lone), cls);
      continue;
    }

    const ClassNeighbors nn = knn_within_class(data, cls, cfg.k);
    std::vector<float> tmp(data.dim);
    for (size_t s = 0; s < need; ++s) {
      const size_t mi = rng.uniform_int(nn.members.size());
      const auto& cand = nn.neighbors[mi];
      const uint32_t nb = cand[rng.uniform_int(cand.size())];
      const double u = rng.uniform();  // [0,1)
      const float* x = data.row(nn.members[mi]);
      const float* y = data.row(nb);
      const float uf = static_cast<float>(u);
      for (int d = 0; d < data.dim; ++d) tmp[d] = x[d] + uf * (y[d] - x[d]);
      synth.push_row(tmp.data(), cls);
    }
  }
  return synth;
}

}  // namespace dsmote
