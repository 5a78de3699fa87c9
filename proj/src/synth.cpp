#include "dsmote/synth.hpp"

#include <algorithm>
#include <filesystem>

#include "dsmote/error.hpp"
#include "dsmote/rng.hpp"

namespace dsmote {

namespace {

// 7x7 stroke masks, upscaled 3x onto a 28x28 canvas.
const char* kGlyphs[10][7] = {
    {".#####.", "#.....#", "#.....#", "#.....#", "#.....#", "#.....#", ".#####."},
    {"...#...", "..##...", "...#...", "...#...", "...#...", "...#...", "..###.."},
    {".#####.", "#.....#", "......#", "..####.", ".#.....", "#......", "#######"},
    {".#####.", "......#", "......#", "..####.", "......#", "......#", ".#####."},
    {"#...#..", "#...#..", "#...#..", "#######", "....#..", "....#..", "....#.."},
    {"#######", "#......", "#......", "######.", "......#", "......#", "######."},
    {".#####.", "#......", "#......", "######.", "#.....#", "#.....#", ".#####."},
    {"#######", "......#", ".....#.", "....#..", "...#...", "..#....", "..#...."},
    {".#####.", "#.....#", "#.....#", ".#####.", "#.....#", "#.....#", ".#####."},
    {".#####.", "#.....#", "#.....#", ".######", "......#", "......#", ".#####."},
};

constexpr int kCell = 7, kScale = 3, kGlyphSize = kCell * kScale;  // 21
constexpr int kImage = 28;

void render_glyph(int cls, Rng& rng, uint8_t* out) {
  const int max_off = kImage - kGlyphSize;  // 7
  const int dx = static_cast<int>(rng.uniform_int(max_off + 1));
  const int dy = static_cast<int>(rng.uniform_int(max_off + 1));
  const int base = 160 + static_cast<int>(rng.uniform_int(96));  // 160..255

  for (int i = 0; i < kImage * kImage; ++i)
    out[i] = static_cast<uint8_t>(rng.uniform_int(26));  // background noise

  for (int gy = 0; gy < kCell; ++gy) {
    for (int gx = 0; gx < kCell; ++gx) {
      if (kGlyphs[cls][gy][gx] != '#') continue;
      for (int sy = 0; sy < kScale; ++sy) {
        for (int sx = 0; sx < kScale; ++sx) {
          const int y = dy + gy * kScale + sy;
          const int x = dx + gx * kScale + sx;
          const double wobble = 0.8 + 0.2 * rng.uniform();
          const int v = static_cast<int>(base * wobble);
          out[y * kImage + x] = static_cast<uint8_t>(std::clamp(v, 0, 255));
        }
      }
    }
  }
}

}  // namespace

ImageDataset make_glyph_dataset(const std::vector<size_t>& per_class_counts,
                                uint64_t seed, const std::string& provenance) {
  if (per_class_counts.size() != 10)
    throw DataError("glyph fixture: expected 10 class counts");
  ImageDataset ds;
  ds.channels = 1;
  ds.height = kImage;
  ds.width = kImage;
  ds.class_count = 10;
  ds.provenance = provenance;
  size_t total = 0;
  for (size_t c : per_class_counts) total += c;
  ds.pixels.resize(total * kImage * kImage);
  ds.labels.reserve(total);

  // Interleave classes so the raw file order is not sorted by label.
  std::vector<size_t> remaining = per_class_counts;
  std::vector<Rng> streams;
  for (int c = 0; c < 10; ++c)
    streams.push_back(derive_rng(seed, provenance + ".class" + std::to_string(c)));
  Rng order = derive_rng(seed, provenance + ".order");
  size_t written = 0;
  while (written < total) {
    std::vector<int> alive;
    for (int c = 0; c < 10; ++c)
      if (remaining[c] > 0) alive.push_back(c);
    const int cls = alive[order.uniform_int(alive.size())];
    render_glyph(cls, streams[cls], ds.pixels.data() + written * kImage * kImage);
    ds.labels.push_back(cls);
    remaining[cls]--;
    written++;
  }
  return ds;
}

const std::vector<size_t>& mnist_like_train_counts() {
  static const std::vector<size_t> c = {5923, 6742, 5958, 6131, 5842,
                                        5421, 5918, 6265, 5851, 5949};
  return c;
}

void write_glyph_fixture(const std::string& dir, uint64_t seed) {
  std::filesystem::create_directories(dir);
  const auto train = make_glyph_dataset(mnist_like_train_counts(),
                                        derive_seed(seed, "fixture.train"), "train");
  save_idx(train, dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
  const auto test = make_glyph_dataset(std::vector<size_t>(10, 1300),
                                       derive_seed(seed, "fixture.test"), "test");
  save_idx(test, dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
}

}  // namespace dsmote
