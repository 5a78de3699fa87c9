#include "dsmote/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "dsmote/error.hpp"
#include "dsmote/rng.hpp"

namespace dsmote {

using nlohmann::json;

std::vector<size_t> ImageDataset::histogram() const {
  std::vector<size_t> h(class_count, 0);
  for (int32_t l : labels) {
    if (l < 0 || l >= class_count)
      throw DataError("dataset: label " + std::to_string(l) + " outside class count " +
                      std::to_string(class_count));
    h[l]++;
  }
  return h;
}

void ImageDataset::validate() const {
  if (size() == 0) throw DataError("dataset: empty");
  if (channels != 1 && channels != 3)
    throw DataError("dataset: channel count must be 1 or 3");
  if (pixels.size() != size() * image_bytes())
    throw DataError("dataset: pixel buffer does not match N*C*H*W");
  histogram();
}

std::string ImbalanceProfile::to_json() const {
  json j;
  j["counts"] = counts;
  if (!class_order.empty()) j["class_order"] = class_order;
  j["seed"] = seed;
  return j.dump(2);
}

ImbalanceProfile ImbalanceProfile::from_json(const std::string& text) {
  ImbalanceProfile p;
  try {
    json j = json::parse(text);
    p.counts = j.at("counts").get<std::vector<size_t>>();
    if (j.contains("class_order"))
      p.class_order = j["class_order"].get<std::vector<int32_t>>();
    p.seed = j.value("seed", 0ull);
  } catch (const json::exception& e) {
    throw DataError(std::string("imbalance profile: bad JSON: ") + e.what());
  }
  return p;
}

std::string FoldAssignment::to_json() const {
  json j;
  j["fold_count"] = fold_count;
  j["fold_of"] = fold_of;
  return j.dump();
}

FoldAssignment FoldAssignment::from_json(const std::string& text) {
  FoldAssignment f;
  try {
    json j = json::parse(text);
    f.fold_count = j.at("fold_count").get<int>();
    f.fold_of = j.at("fold_of").get<std::vector<int32_t>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("fold assignment: bad JSON: ") + e.what());
  }
  return f;
}

namespace {

// Buffered reader over gzFile. zlib transparently handles both gzip and
// plain files; offsets reported in errors are uncompressed-byte offsets.
class IdxReader {
 public:
  explicit IdxReader(const std::string& path) : path_(path) {
    file_ = gzopen(path.c_str(), "rb");
    if (!file_) throw DataError(path + ": cannot open");
  }
  ~IdxReader() {
    if (file_) gzclose(file_);
  }
  IdxReader(const IdxReader&) = delete;
  IdxReader& operator=(const IdxReader&) = delete;

  void read(void* dst, size_t n) {
    const int got = gzread(file_, dst, static_cast<unsigned>(n));
    if (got < 0 || static_cast<size_t>(got) != n)
      throw DataError(path_ + ": truncated at offset " + std::to_string(offset_));
    offset_ += n;
  }

  uint32_t read_u32_be() {
    unsigned char b[4];
    read(b, 4);
    return (static_cast<uint32_t>(b[0]) << 24) | (static_cast<uint32_t>(b[1]) << 16) |
           (static_cast<uint32_t>(b[2]) << 8) | static_cast<uint32_t>(b[3]);
  }

  size_t offset() const { return offset_; }

 private:
  std::string path_;
  gzFile file_ = nullptr;
  size_t offset_ = 0;
};

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

void write_u32_be(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>((v >> 24) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>(v & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

ImageDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  IdxReader imgs(images_path);
  const uint32_t magic = imgs.read_u32_be();
  if (magic != kImagesMagic)
    throw DataError(images_path + ": bad images magic 0x" +
                    [&] {
                      char buf[16];
                      std::snprintf(buf, sizeof buf, "%08x", magic);
                      return std::string(buf);
                    }() +
                    " at offset 0 (expected 0x00000803)");
  const uint32_t count = imgs.read_u32_be();
  const uint32_t rows = imgs.read_u32_be();
  const uint32_t cols = imgs.read_u32_be();
  if (count == 0 || rows == 0 || cols == 0)
    throw DataError(images_path + ": zero dimension in header");

  ImageDataset ds;
  ds.channels = 1;
  ds.height = static_cast<int>(rows);
  ds.width = static_cast<int>(cols);
  ds.pixels.resize(static_cast<size_t>(count) * rows * cols);
  imgs.read(ds.pixels.data(), ds.pixels.size());

  IdxReader labs(labels_path);
  const uint32_t lmagic = labs.read_u32_be();
  if (lmagic != kLabelsMagic)
    throw DataError(labels_path + ": bad labels magic 0x" +
                    [&] {
                      char buf[16];
                      std::snprintf(buf, sizeof buf, "%08x", lmagic);
                      return std::string(buf);
                    }() +
                    " at offset 0 (expected 0x00000801)");
  const uint32_t lcount = labs.read_u32_be();
  if (lcount != count)
    throw DataError(labels_path + ": label count " + std::to_string(lcount) +
                    " does not match image count " + std::to_string(count));
  std::vector<uint8_t> raw(lcount);
  labs.read(raw.data(), raw.size());
  ds.labels.assign(raw.begin(), raw.end());
  const int32_t max_label = *std::max_element(ds.labels.begin(), ds.labels.end());
  ds.class_count = std::max(10, max_label + 1);
  ds.provenance = images_path;
  ds.validate();
  return ds;
}

void save_idx(const ImageDataset& ds, const std::string& images_path,
              const std::string& labels_path) {
  if (ds.channels != 1)
    throw DataError("save_idx: only single-channel datasets are stored as IDX");
  std::ofstream imgs(images_path, std::ios::binary | std::ios::trunc);
  if (!imgs) throw DataError(images_path + ": cannot open for writing");
  write_u32_be(imgs, kImagesMagic);
  write_u32_be(imgs, static_cast<uint32_t>(ds.size()));
  write_u32_be(imgs, static_cast<uint32_t>(ds.height));
  write_u32_be(imgs, static_cast<uint32_t>(ds.width));
  imgs.write(reinterpret_cast<const char*>(ds.pixels.data()),
             static_cast<std::streamsize>(ds.pixels.size()));
  if (!imgs) throw DataError(images_path + ": write failed");

  std::ofstream labs(labels_path, std::ios::binary | std::ios::trunc);
  if (!labs) throw DataError(labels_path + ": cannot open for writing");
  write_u32_be(labs, kLabelsMagic);
  write_u32_be(labs, static_cast<uint32_t>(ds.size()));
  for (int32_t l : ds.labels) {
    const unsigned char b = static_cast<unsigned char>(l);
    labs.write(reinterpret_cast<const char*>(&b), 1);
  }
  if (!labs) throw DataError(labels_path + ": write failed");
}

ImageDataset take_subset(const ImageDataset& ds, const std::vector<uint32_t>& indices) {
  ImageDataset out;
  out.channels = ds.channels;
  out.height = ds.height;
  out.width = ds.width;
  out.class_count = ds.class_count;
  out.provenance = ds.provenance;
  const size_t ib = ds.image_bytes();
  out.pixels.resize(indices.size() * ib);
  out.labels.resize(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= ds.size()) throw DataError("take_subset: index out of range");
    std::memcpy(out.pixels.data() + i * ib, ds.image(indices[i]), ib);
    out.labels[i] = ds.labels[indices[i]];
  }
  return out;
}

namespace {

// Uniform without-replacement draw of `want` indices per class.
std::vector<uint32_t> sample_by_class(const ImageDataset& ds,
                                      const std::vector<size_t>& want, uint64_t seed,
                                      const char* what) {
  const auto hist = ds.histogram();
  if (want.size() != hist.size())
    throw DataError(std::string(what) + ": profile has " + std::to_string(want.size()) +
                    " counts but dataset has " + std::to_string(hist.size()) +
                    " classes");
  std::vector<std::vector<uint32_t>> per_class(hist.size());
  for (size_t i = 0; i < ds.size(); ++i)
    per_class[ds.labels[i]].push_back(static_cast<uint32_t>(i));

  std::vector<uint32_t> chosen;
  for (size_t c = 0; c < want.size(); ++c) {
    if (want[c] < 1)
      throw DataError(std::string(what) + ": class " + std::to_string(c) +
                      " count must be >= 1");
    if (want[c] > per_class[c].size())
      throw DataError(std::string(what) + ": class " + std::to_string(c) + " wants " +
                      std::to_string(want[c]) + " but only " +
                      std::to_string(per_class[c].size()) + " available");
    Rng rng = derive_rng(seed, std::string(what) + ".class" + std::to_string(c));
    rng.shuffle(per_class[c]);
    chosen.insert(chosen.end(), per_class[c].begin(), per_class[c].begin() + want[c]);
  }
  Rng rng = derive_rng(seed, std::string(what) + ".shuffle");
  rng.shuffle(chosen);
  return chosen;
}

}  // namespace

ImageDataset apply_imbalance(const ImageDataset& ds, const ImbalanceProfile& profile) {
  std::vector<size_t> want(ds.class_count, 0);
  if (profile.class_order.empty()) {
    if (profile.counts.size() != static_cast<size_t>(ds.class_count))
      throw DataError("apply_imbalance: profile size mismatch");
    want = profile.counts;
  } else {
    if (profile.class_order.size() != profile.counts.size())
      throw DataError("apply_imbalance: class_order and counts sizes differ");
    for (size_t i = 0; i < profile.counts.size(); ++i) {
      const int32_t cls = profile.class_order[i];
      if (cls < 0 || cls >= ds.class_count)
        throw DataError("apply_imbalance: class_order entry out of range");
      want[cls] = profile.counts[i];
    }
  }
  auto chosen = sample_by_class(ds, want, profile.seed, "imbalance");
  return take_subset(ds, chosen);
}

std::pair<ImageDataset, ImageDataset> build_test_sets(
    const ImageDataset& ds_test, const std::vector<size_t>& balanced_counts,
    const std::vector<size_t>& imbalanced_counts, uint64_t seed) {
  auto bal = take_subset(ds_test,
                         sample_by_class(ds_test, balanced_counts, seed, "bal_test"));
  auto imb = take_subset(
      ds_test, sample_by_class(ds_test, imbalanced_counts, seed, "imbal_test"));
  return {std::move(bal), std::move(imb)};
}

FoldAssignment make_folds(const ImageDataset& ds, int k, uint64_t seed) {
  if (k < 2) throw DataError("make_folds: fold count must be >= 2");
  const auto hist = ds.histogram();
  for (size_t c = 0; c < hist.size(); ++c)
    if (hist[c] < static_cast<size_t>(k))
      throw DataError("make_folds: class " + std::to_string(c) + " has " +
                      std::to_string(hist[c]) + " members, fewer than " +
                      std::to_string(k) + " folds");
  FoldAssignment fa;
  fa.fold_count = k;
  fa.fold_of.assign(ds.size(), -1);
  std::vector<std::vector<uint32_t>> per_class(hist.size());
  for (size_t i = 0; i < ds.size(); ++i)
    per_class[ds.labels[i]].push_back(static_cast<uint32_t>(i));
  for (size_t c = 0; c < per_class.size(); ++c) {
    Rng rng = derive_rng(seed, "folds.class" + std::to_string(c));
    rng.shuffle(per_class[c]);
    for (size_t i = 0; i < per_class[c].size(); ++i)
      fa.fold_of[per_class[c][i]] = static_cast<int32_t>(i % k);
  }
  return fa;
}

Tensor normalize_subset(const ImageDataset& ds, const std::vector<uint32_t>& indices) {
  if (ds.height > kNetImage || ds.width > kNetImage)
    throw DataError("normalize: images larger than 32x32 are not supported");
  const int pad_top = (kNetImage - ds.height) / 2;
  const int pad_left = (kNetImage - ds.width) / 2;
  Tensor out({static_cast<int>(indices.size()), ds.channels, kNetImage, kNetImage});
  std::fill(out.data.begin(), out.data.end(), -1.0f);
  const size_t plane = static_cast<size_t>(kNetImage) * kNetImage;
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= ds.size()) throw DataError("normalize: index out of range");
    const uint8_t* src = ds.image(indices[i]);
    for (int c = 0; c < ds.channels; ++c) {
      float* dst = out.ptr() + (i * ds.channels + c) * plane;
      for (int y = 0; y < ds.height; ++y) {
        for (int x = 0; x < ds.width; ++x) {
          const uint8_t p = src[(static_cast<size_t>(c) * ds.height + y) * ds.width + x];
          dst[(pad_top + y) * kNetImage + (pad_left + x)] =
              2.0f * static_cast<float>(p) / 255.0f - 1.0f;
        }
      }
    }
  }
  return out;
}

Tensor normalize(const ImageDataset& ds) {
  std::vector<uint32_t> all(ds.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<uint32_t>(i);
  return normalize_subset(ds, all);
}

std::vector<uint8_t> denormalize_image(const float* net_image, int channels, int h,
                                       int w) {
  const int pad_top = (kNetImage - h) / 2;
  const int pad_left = (kNetImage - w) / 2;
  std::vector<uint8_t> out(static_cast<size_t>(channels) * h * w);
  const size_t plane = static_cast<size_t>(kNetImage) * kNetImage;
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float v = net_image[c * plane + (pad_top + y) * kNetImage + (pad_left + x)];
        v = std::clamp(v, -1.0f, 1.0f);
        const float scaled = (v + 1.0f) * 255.0f / 2.0f;
        out[(static_cast<size_t>(c) * h + y) * w + x] =
            static_cast<uint8_t>(std::lround(scaled));
      }
    }
  }
  return out;
}

std::vector<size_t> desk_counts(const std::vector<size_t>& full) {
  std::vector<size_t> out;
  out.reserve(full.size());
  for (size_t v : full) out.push_back(std::max<size_t>(4, v / 10));
  return out;
}

const std::vector<size_t>& mnist_train_profile() {
  static const std::vector<size_t> p = {4000, 2000, 1000, 750, 500,
                                        350,  200,  100,  60,  40};
  return p;
}

const std::vector<size_t>& mnist_balanced_test() {
  static const std::vector<size_t> p(10, 1200);
  return p;
}

const std::vector<size_t>& mnist_imbalanced_test() {
  static const std::vector<size_t> p = {1000, 500, 250, 187, 125, 87, 50, 25, 15, 10};
  return p;
}

}  // namespace dsmote
