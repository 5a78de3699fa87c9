#include <doctest.h>
#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "dsmote/dataset.hpp"
#include "dsmote/synth.hpp"

using namespace dsmote;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
}

void push_u32_be(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back((x >> 24) & 0xff);
  v.push_back((x >> 16) & 0xff);
  v.push_back((x >> 8) & 0xff);
  v.push_back(x & 0xff);
}

// Hand-built 2-image 2x2 IDX pair with known bytes.
struct Fixture {
  std::string images, labels;
  std::vector<uint8_t> pixel_bytes{10, 20, 30, 40, 200, 210, 220, 255};
};

Fixture make_fixture_pair() {
  Fixture f;
  f.images = temp_path("dsmote_idx_images");
  f.labels = temp_path("dsmote_idx_labels");
  std::vector<uint8_t> img;
  push_u32_be(img, 0x00000803);
  push_u32_be(img, 2);  // count
  push_u32_be(img, 2);  // rows
  push_u32_be(img, 2);  // cols
  img.insert(img.end(), f.pixel_bytes.begin(), f.pixel_bytes.end());
  write_bytes(f.images, img);
  std::vector<uint8_t> lab;
  push_u32_be(lab, 0x00000801);
  push_u32_be(lab, 2);
  lab.push_back(3);
  lab.push_back(9);
  write_bytes(f.labels, lab);
  return f;
}

}  // namespace

TEST_CASE("load_idx: hand-built fixture parses byte-exactly") {
  Fixture f = make_fixture_pair();
  ImageDataset ds = load_idx(f.images, f.labels);
  CHECK(ds.size() == 2);
  CHECK(ds.height == 2);
  CHECK(ds.width == 2);
  CHECK(ds.channels == 1);
  CHECK(ds.pixels == f.pixel_bytes);
  CHECK(ds.labels == std::vector<int32_t>{3, 9});
  std::remove(f.images.c_str());
  std::remove(f.labels.c_str());
}

TEST_CASE("load_idx: label magic in the images slot is rejected at offset 0") {
  Fixture f = make_fixture_pair();
  // pass the labels file as images
  CHECK_THROWS_WITH_AS(load_idx(f.labels, f.images), doctest::Contains("offset 0"),
                       DataError);
  std::remove(f.images.c_str());
  std::remove(f.labels.c_str());
}

TEST_CASE("load_idx: truncation reports a byte offset") {
  const std::string path = temp_path("dsmote_idx_trunc");
  std::vector<uint8_t> img;
  push_u32_be(img, 0x00000803);
  push_u32_be(img, 2);
  push_u32_be(img, 2);
  push_u32_be(img, 2);
  img.push_back(1);  // 1 of 8 pixel bytes
  write_bytes(path, img);
  Fixture f = make_fixture_pair();
  CHECK_THROWS_WITH_AS(load_idx(path, f.labels), doctest::Contains("truncated"),
                       DataError);
  std::remove(path.c_str());
  std::remove(f.images.c_str());
  std::remove(f.labels.c_str());
}

TEST_CASE("load_idx: count mismatch between the pair is rejected") {
  Fixture f = make_fixture_pair();
  const std::string labels3 = temp_path("dsmote_idx_labels3");
  std::vector<uint8_t> lab;
  push_u32_be(lab, 0x00000801);
  push_u32_be(lab, 3);
  lab.insert(lab.end(), {1, 2, 3});
  write_bytes(labels3, lab);
  CHECK_THROWS_AS(load_idx(f.images, labels3), DataError);
  std::remove(f.images.c_str());
  std::remove(f.labels.c_str());
  std::remove(labels3.c_str());
}

TEST_CASE("load_idx: gzip-compressed files accepted by suffix") {
  Fixture f = make_fixture_pair();
  auto gzip = [](const std::string& src, const std::string& dst) {
    std::ifstream is(src, std::ios::binary);
    std::vector<char> bytes{std::istreambuf_iterator<char>(is),
                            std::istreambuf_iterator<char>()};
    gzFile gz = gzopen(dst.c_str(), "wb");
    REQUIRE(gz != nullptr);
    gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(gz);
  };
  const std::string gzi = temp_path("dsmote_idx_images.gz");
  const std::string gzl = temp_path("dsmote_idx_labels.gz");
  gzip(f.images, gzi);
  gzip(f.labels, gzl);
  ImageDataset ds = load_idx(gzi, gzl);
  CHECK(ds.pixels == f.pixel_bytes);
  for (const auto& p : {f.images, f.labels, gzi, gzl}) std::remove(p.c_str());
}

TEST_CASE("apply_imbalance: desk profile histogram and 100:1 ratio") {
  ImageDataset full =
      make_glyph_dataset(std::vector<size_t>(10, 500), 11, "train");
  ImbalanceProfile profile;
  profile.counts = desk_counts(mnist_train_profile());
  profile.seed = 21;
  REQUIRE(profile.counts ==
          std::vector<size_t>{400, 200, 100, 75, 50, 35, 20, 10, 6, 4});
  ImageDataset skewed = apply_imbalance(full, profile);
  CHECK(skewed.histogram() == profile.counts);
  CHECK(skewed.size() == 900);
  // ratio majority:minority = 400:4 = 100
  CHECK(profile.counts.front() / profile.counts.back() == 100);
}

TEST_CASE("apply_imbalance: full profile is a permutation of the input") {
  ImageDataset full = make_glyph_dataset(std::vector<size_t>(10, 30), 12, "train");
  ImbalanceProfile profile;
  profile.counts.assign(10, 30);
  profile.seed = 4;
  ImageDataset out = apply_imbalance(full, profile);
  CHECK(out.size() == full.size());
  CHECK(out.histogram() == full.histogram());
  // same multiset of images: compare sorted per-image checksums
  auto digest = [](const ImageDataset& ds) {
    std::vector<uint64_t> sums;
    for (size_t i = 0; i < ds.size(); ++i) {
      uint64_t h = ds.labels[i];
      const uint8_t* img = ds.image(i);
      for (size_t b = 0; b < ds.image_bytes(); ++b) h = h * 131 + img[b];
      sums.push_back(h);
    }
    std::sort(sums.begin(), sums.end());
    return sums;
  };
  CHECK(digest(out) == digest(full));
}

TEST_CASE("apply_imbalance: infeasible counts and class_order") {
  ImageDataset full = make_glyph_dataset(std::vector<size_t>(10, 10), 13, "train");
  ImbalanceProfile profile;
  profile.counts.assign(10, 11);
  CHECK_THROWS_AS(apply_imbalance(full, profile), DataError);

  ImbalanceProfile remap;
  remap.counts = {9, 8, 7, 6, 5, 4, 3, 2, 2, 2};
  remap.class_order = {9, 8, 7, 6, 5, 4, 3, 2, 1, 0};  // majority becomes class 9
  ImageDataset out = apply_imbalance(full, remap);
  const auto hist = out.histogram();
  CHECK(hist[9] == 9);
  CHECK(hist[0] == 2);
}

TEST_CASE("apply_imbalance: without replacement and deterministic") {
  ImageDataset full = make_glyph_dataset(std::vector<size_t>(10, 50), 14, "train");
  ImbalanceProfile profile;
  profile.counts = {40, 30, 20, 10, 5, 5, 5, 5, 5, 5};
  profile.seed = 77;
  ImageDataset a = apply_imbalance(full, profile);
  ImageDataset b = apply_imbalance(full, profile);
  CHECK(a.pixels == b.pixels);
  CHECK(a.labels == b.labels);
  // no duplicate source images within a class: checksum uniqueness
  std::set<std::vector<uint8_t>> seen;
  for (size_t i = 0; i < a.size(); ++i) {
    std::vector<uint8_t> img(a.image(i), a.image(i) + a.image_bytes());
    CHECK(seen.insert(img).second);
  }
}

TEST_CASE("build_test_sets: Table-style histograms") {
  ImageDataset test = make_glyph_dataset(std::vector<size_t>(10, 1300), 15, "test");
  auto [bal, imb] =
      build_test_sets(test, mnist_balanced_test(), mnist_imbalanced_test(), 3);
  CHECK(bal.size() == 12000);
  CHECK(bal.histogram() == mnist_balanced_test());
  CHECK(imb.histogram() == mnist_imbalanced_test());

  // exhaustive balanced draw: counts equal to availability
  auto [all_bal, small_imb] = build_test_sets(
      test, std::vector<size_t>(10, 1300), std::vector<size_t>(10, 1), 3);
  CHECK(all_bal.size() == test.size());
  CHECK(all_bal.histogram() == test.histogram());
  CHECK(small_imb.size() == 10);

  CHECK_THROWS_AS(build_test_sets(test, std::vector<size_t>(10, 1301),
                                  std::vector<size_t>(10, 1), 3),
                  DataError);
}

TEST_CASE("make_folds: stratification and feasibility") {
  ImageDataset ten = make_glyph_dataset(std::vector<size_t>(10, 10), 16, "train");
  FoldAssignment fa = make_folds(ten, 5, 9);
  std::vector<std::vector<int>> per_class_fold(10, std::vector<int>(5, 0));
  for (size_t i = 0; i < ten.size(); ++i)
    per_class_fold[ten.labels[i]][fa.fold_of[i]]++;
  for (const auto& row : per_class_fold)
    for (int n : row) CHECK(n == 2);  // 10 per class over 5 folds

  ImageDataset eleven = make_glyph_dataset(std::vector<size_t>(10, 11), 17, "train");
  FoldAssignment fb = make_folds(eleven, 5, 9);
  std::vector<std::vector<int>> counts(10, std::vector<int>(5, 0));
  for (size_t i = 0; i < eleven.size(); ++i)
    counts[eleven.labels[i]][fb.fold_of[i]]++;
  for (const auto& row : counts) {
    const int mx = *std::max_element(row.begin(), row.end());
    const int mn = *std::min_element(row.begin(), row.end());
    CHECK(mx - mn <= 1);
  }

  // folds partition the dataset
  for (int32_t f : fb.fold_of) {
    CHECK(f >= 0);
    CHECK(f < 5);
  }

  // desk profile: smallest class (4) cannot be split 5 ways, but 2 works
  ImageDataset desk = make_glyph_dataset(desk_counts(mnist_train_profile()), 18, "train");
  CHECK_THROWS_AS(make_folds(desk, 5, 9), DataError);
  FoldAssignment fc = make_folds(desk, 2, 9);
  std::vector<int> small_class_folds(2, 0);
  for (size_t i = 0; i < desk.size(); ++i)
    if (desk.labels[i] == 9) small_class_folds[fc.fold_of[i]]++;
  CHECK(small_class_folds[0] == 2);
  CHECK(small_class_folds[1] == 2);

  // JSON round-trip
  FoldAssignment fd = FoldAssignment::from_json(fc.to_json());
  CHECK(fd.fold_of == fc.fold_of);
  CHECK(fd.fold_count == fc.fold_count);
}

TEST_CASE("normalize: pixel mapping and 2-pixel pad for 28x28") {
  ImageDataset ds;
  ds.channels = 1;
  ds.height = 28;
  ds.width = 28;
  ds.class_count = 10;
  ds.pixels.assign(28 * 28, 0);
  ds.pixels[0] = 0;
  ds.pixels[1] = 255;
  ds.pixels[2] = 128;
  ds.labels = {0};
  Tensor t = normalize(ds);
  REQUIRE(t.shape == std::vector<int>{1, 1, 32, 32});
  // border is -1
  CHECK(t.data[0] == -1.0f);
  CHECK(t.data[1 * 32 + 1] == -1.0f);
  // (2,2) is source (0,0)
  CHECK(t.data[2 * 32 + 2] == doctest::Approx(-1.0f));
  CHECK(t.data[2 * 32 + 3] == doctest::Approx(1.0f));
  CHECK(t.data[2 * 32 + 4] == doctest::Approx(2.0 * 128 / 255.0 - 1.0));
}

TEST_CASE("normalize/denormalize round-trips pixels exactly") {
  ImageDataset ds = make_glyph_dataset(std::vector<size_t>(10, 3), 19, "train");
  Tensor t = normalize(ds);
  const size_t plane = static_cast<size_t>(kNetImage) * kNetImage;
  for (size_t i = 0; i < ds.size(); ++i) {
    auto back = denormalize_image(t.ptr() + i * plane, 1, ds.height, ds.width);
    const uint8_t* orig = ds.image(i);
    for (size_t b = 0; b < ds.image_bytes(); ++b) REQUIRE(back[b] == orig[b]);
  }
}

TEST_CASE("imbalance profile JSON round-trip") {
  ImbalanceProfile p;
  p.counts = {4, 3, 2, 1};
  p.class_order = {3, 2, 1, 0};
  p.seed = 42;
  ImbalanceProfile q = ImbalanceProfile::from_json(p.to_json());
  CHECK(q.counts == p.counts);
  CHECK(q.class_order == p.class_order);
  CHECK(q.seed == p.seed);
}

TEST_CASE("glyph fixture: deterministic and MNIST-shaped") {
  ImageDataset a = make_glyph_dataset({5, 5, 5, 5, 5, 5, 5, 5, 5, 5}, 7, "train");
  ImageDataset b = make_glyph_dataset({5, 5, 5, 5, 5, 5, 5, 5, 5, 5}, 7, "train");
  CHECK(a.pixels == b.pixels);
  CHECK(a.labels == b.labels);
  CHECK(a.height == 28);
  size_t total = 0;
  for (size_t c : mnist_like_train_counts()) total += c;
  CHECK(total == 60000);
}
