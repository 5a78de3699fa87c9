#include "dsmote/oversampler.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "dsmote/error.hpp"
#include "dsmote/png.hpp"

namespace dsmote {

using nlohmann::json;

LabeledVectors LatentBatch::as_labeled_vectors() const {
  LabeledVectors v;
  v.dim = latent_dim;
  v.data = codes;
  v.labels = labels;
  return v;
}

LatentBatch encode_dataset(Net& encoder, const ImageDataset& ds) {
  ds.validate();
  const auto out_shape = encoder.spec.output_shape();
  if (out_shape.size() != 1)
    throw ShapeError("encode_dataset: encoder must produce flat codes");
  LatentBatch lb;
  lb.latent_dim = out_shape[0];
  lb.labels = ds.labels;
  lb.codes.resize(ds.size() * static_cast<size_t>(lb.latent_dim));

  constexpr size_t kChunk = 256;
  std::vector<uint32_t> idx;
  for (size_t start = 0; start < ds.size(); start += kChunk) {
    const size_t end = std::min(ds.size(), start + kChunk);
    idx.resize(end - start);
    for (size_t i = start; i < end; ++i) idx[i - start] = static_cast<uint32_t>(i);
    Tensor batch = normalize_subset(ds, idx);
    Tensor codes = forward(encoder.spec, encoder.params, batch, Mode::eval, nullptr);
    std::copy_n(codes.ptr(), codes.numel(),
                lb.codes.data() + start * static_cast<size_t>(lb.latent_dim));
  }
  return lb;
}

GenerationResult generate_balanced(Net& encoder, Net& decoder, const ImageDataset& ds,
                                   const GenerationPlan& plan) {
  ds.validate();
  const auto hist = ds.histogram();

  std::vector<size_t> synth(ds.class_count, 0);
  if (plan.synthetic_counts.empty()) {
    const size_t majority = *std::max_element(hist.begin(), hist.end());
    for (int c = 0; c < ds.class_count; ++c)
      synth[c] = hist[c] > 0 ? majority - hist[c] : 0;
  } else {
    if (plan.synthetic_counts.size() != static_cast<size_t>(ds.class_count))
      throw DataError("generate_balanced: plan size does not match class count");
    synth = plan.synthetic_counts;
  }

  GenerationResult out;
  out.dataset.channels = ds.channels;
  out.dataset.height = ds.height;
  out.dataset.width = ds.width;
  out.dataset.class_count = ds.class_count;
  out.dataset.provenance = ds.provenance;
  out.dataset.pixels = ds.pixels;  // originals pass through bit-identical
  out.dataset.labels = ds.labels;

  size_t total_synth = 0;
  for (size_t s : synth) total_synth += s;
  if (total_synth == 0) return out;

  LatentBatch lb = encode_dataset(encoder, ds);
  SmoteConfig cfg;
  cfg.k = plan.k;
  cfg.seed = plan.seed;
  for (int c = 0; c < ds.class_count; ++c)
    if (synth[c] > 0) cfg.targets[c] = hist[c] + synth[c];
  LabeledVectors synth_codes = oversample(lb.as_labeled_vectors(), cfg);

  // Decode in chunks, de-normalize and append grouped by class. oversample
  // already emits classes in ascending order.
  const size_t ib = ds.image_bytes();
  out.dataset.pixels.reserve(out.dataset.pixels.size() + synth_codes.count() * ib);
  constexpr size_t kChunk = 256;
  size_t appended_start = ds.size();
  for (size_t start = 0; start < synth_codes.count(); start += kChunk) {
    const size_t end = std::min(synth_codes.count(), start + kChunk);
    Tensor codes({static_cast<int>(end - start), lb.latent_dim});
    std::copy_n(synth_codes.data.data() + start * static_cast<size_t>(lb.latent_dim),
                codes.numel(), codes.ptr());
    Tensor decoded = forward(decoder.spec, decoder.params, codes, Mode::eval, nullptr);
    const size_t plane = decoded.numel() / (end - start);
    for (size_t i = 0; i < end - start; ++i) {
      auto img = denormalize_image(decoded.ptr() + i * plane, ds.channels, ds.height,
                                   ds.width);
      out.dataset.pixels.insert(out.dataset.pixels.end(), img.begin(), img.end());
      out.dataset.labels.push_back(synth_codes.labels[start + i]);
    }
  }

  size_t cursor = appended_start;
  for (int c = 0; c < ds.class_count; ++c) {
    if (synth[c] == 0) continue;
    out.ranges.push_back(SyntheticRange{c, cursor, synth[c]});
    cursor += synth[c];
  }
  return out;
}

void export_augmented(const GenerationResult& gen, const std::string& images_path,
                      const std::string& labels_path, const std::string& sidecar_path) {
  save_idx(gen.dataset, images_path, labels_path);
  json j;
  j["total"] = gen.dataset.size();
  json arr = json::array();
  for (const auto& r : gen.ranges) {
    json e;
    e["class"] = r.class_id;
    e["start"] = r.start;
    e["count"] = r.count;
    arr.push_back(e);
  }
  j["synthetic_ranges"] = arr;
  std::ofstream os(sidecar_path, std::ios::trunc);
  if (!os) throw DataError(sidecar_path + ": cannot open for writing");
  os << j.dump(2) << '\n';
}

void export_image_grid(const ImageDataset& ds, size_t first, int rows, int cols,
                       const std::string& path) {
  if (rows < 1 || cols < 1)
    throw DataError("export_image_grid: grid must be at least 1x1");
  if (first + static_cast<size_t>(rows) * cols > ds.size())
    throw DataError("export_image_grid: grid larger than available images");

  constexpr int kSep = 2;  // 2-pixel separators between cells, no outer border
  constexpr uint8_t kBackdrop = 128;
  const int h = ds.height, w = ds.width, c = ds.channels;
  const int out_w = cols * w + (cols - 1) * kSep;
  const int out_h = rows * h + (rows - 1) * kSep;
  std::vector<uint8_t> canvas(static_cast<size_t>(out_w) * out_h * c, kBackdrop);

  for (int r = 0; r < rows; ++r) {
    for (int col = 0; col < cols; ++col) {
      const uint8_t* img = ds.image(first + static_cast<size_t>(r) * cols + col);
      const int oy = r * (h + kSep);
      const int ox = col * (w + kSep);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          for (int ch = 0; ch < c; ++ch) {
            // dataset is CHW, PNG rows are interleaved
            canvas[(static_cast<size_t>(oy + y) * out_w + (ox + x)) * c + ch] =
                img[(static_cast<size_t>(ch) * h + y) * w + x];
          }
        }
      }
    }
  }
  write_png(path, out_w, out_h, c, canvas);
}

}  // namespace dsmote
