#include "dsmote/params.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "dsmote/error.hpp"
#include "dsmote/kernels.hpp"

namespace dsmote {

void ParamStore::add(std::string name, Tensor value, bool trainable) {
  if (has(name)) throw ShapeError("duplicate parameter name '" + name + "'");
  index_[name] = entries.size();
  entries.push_back(Entry{std::move(name), std::move(value), trainable});
  adam_m.emplace_back();
  adam_v.emplace_back();
}

bool ParamStore::has(const std::string& name) const {
  return index_.count(name) != 0;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ShapeError("no parameter named '" + name + "'");
  return entries[it->second].value;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ShapeError("no parameter named '" + name + "'");
  return entries[it->second].value;
}

std::vector<float> ParamStore::flat_trainable() const {
  std::vector<float> out;
  for (const auto& e : entries)
    if (e.trainable) out.insert(out.end(), e.value.data.begin(), e.value.data.end());
  return out;
}

namespace {

constexpr char kMagic[4] = {'D', 'S', 'M', 'W'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (is.gcount() != 4) throw DataError(path + ": truncated checkpoint");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, const float* data, size_t n) {
  // All supported targets are little-endian; write raw.
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
}

void write_record(std::ostream& os, const std::string& name, const Tensor& t) {
  put_u32(os, static_cast<uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(os, static_cast<uint32_t>(t.shape.size()));
  for (int d : t.shape) put_u32(os, static_cast<uint32_t>(d));
  put_f32(os, t.ptr(), t.numel());
}

}  // namespace

void ParamStore::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError(path + ": cannot open for writing");
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  for (const auto& e : entries) write_record(os, e.name, e.value);
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].trainable || adam_m[i].numel() == 0) continue;
    write_record(os, "adam.m." + entries[i].name, adam_m[i]);
    write_record(os, "adam.v." + entries[i].name, adam_v[i]);
  }
  Tensor t({1});
  t.data[0] = static_cast<float>(adam_t);
  write_record(os, "adam.t", t);
  if (!os) throw DataError(path + ": write failed");
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError(path + ": cannot open");
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError(path + ": bad checkpoint magic at offset 0");
  const uint32_t version = get_u32(is, path);
  if (version != kVersion)
    throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));

  ParamStore store;
  std::vector<std::pair<std::string, Tensor>> adam_records;
  while (true) {
    is.peek();
    if (is.eof()) break;
    if (!is) throw DataError(path + ": read failed");
    const uint32_t name_len = get_u32(is, path);
    if (name_len > 4096) throw DataError(path + ": implausible name length");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (is.gcount() != static_cast<std::streamsize>(name_len))
      throw DataError(path + ": truncated name record");
    const uint32_t rank = get_u32(is, path);
    if (rank > 8) throw DataError(path + ": implausible tensor rank");
    std::vector<int> shape(rank);
    for (uint32_t i = 0; i < rank; ++i) shape[i] = static_cast<int>(get_u32(is, path));
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.ptr()),
            static_cast<std::streamsize>(t.numel() * 4));
    if (is.gcount() != static_cast<std::streamsize>(t.numel() * 4))
      throw DataError(path + ": truncated tensor data for '" + name + "'");
    if (name.rfind("adam.", 0) == 0)
      adam_records.emplace_back(name, std::move(t));
    else
      store.add(name, std::move(t), true);
  }
  for (auto& [name, t] : adam_records) {
    if (name == "adam.t") {
      store.adam_t = static_cast<uint64_t>(t.data.at(0));
      continue;
    }
    const bool is_m = name.rfind("adam.m.", 0) == 0;
    const bool is_v = name.rfind("adam.v.", 0) == 0;
    if (!is_m && !is_v) throw DataError(path + ": unknown adam record '" + name + "'");
    const std::string param = name.substr(7);
    if (!store.has(param))
      throw DataError(path + ": adam state for unknown parameter '" + param + "'");
    for (size_t i = 0; i < store.entries.size(); ++i) {
      if (store.entries[i].name == param) {
        (is_m ? store.adam_m[i] : store.adam_v[i]) = std::move(t);
        break;
      }
    }
  }
  return store;
}

GradStore GradStore::zeros_like(const ParamStore& store) {
  GradStore g;
  g.grads.reserve(store.entries.size());
  for (const auto& e : store.entries)
    g.grads.push_back(e.trainable ? Tensor::zeros(e.value.shape) : Tensor());
  return g;
}

void GradStore::axpy(double scale, const GradStore& other) {
  if (grads.size() != other.grads.size())
    throw ShapeError("gradient stores have different entry counts");
  const float s = static_cast<float>(scale);
  for (size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].numel() != other.grads[i].numel())
      throw ShapeError("gradient shape mismatch in axpy");
    float* a = grads[i].ptr();
    const float* b = other.grads[i].ptr();
    for (size_t j = 0; j < grads[i].numel(); ++j) a[j] += s * b[j];
  }
}

bool GradStore::all_finite() const {
  for (const auto& g : grads)
    if (g.numel() != 0 && !g.all_finite()) return false;
  return true;
}

void adam_step(ParamStore& store, const GradStore& grads, double lr, double beta1,
               double beta2, double eps) {
  if (grads.grads.size() != store.entries.size())
    throw ShapeError("gradient store does not match parameter store");
  for (size_t i = 0; i < store.entries.size(); ++i) {
    if (!store.entries[i].trainable) continue;
    const Tensor& g = grads.grads[i];
    if (!g.same_shape(store.entries[i].value))
      throw ShapeError("gradient shape mismatch for '" + store.entries[i].name + "'");
    if (!g.all_finite())
      throw NumericError("non-finite gradient for '" + store.entries[i].name + "'");
  }
  store.adam_t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(store.adam_t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(store.adam_t));
  for (size_t i = 0; i < store.entries.size(); ++i) {
    auto& e = store.entries[i];
    if (!e.trainable) continue;
    if (store.adam_m[i].numel() == 0) {
      store.adam_m[i] = Tensor::zeros(e.value.shape);
      store.adam_v[i] = Tensor::zeros(e.value.shape);
    }
    kernels::adam_update(e.value.numel(), static_cast<float>(lr),
                         static_cast<float>(beta1), static_cast<float>(beta2),
                         static_cast<float>(eps), bc1, bc2, grads.grads[i].ptr(),
                         store.adam_m[i].ptr(), store.adam_v[i].ptr(), e.value.ptr());
  }
}

}  // namespace dsmote
