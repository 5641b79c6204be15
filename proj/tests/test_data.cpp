#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <set>
#include <sstream>

#include "dlrlab/idx.hpp"
#include "dlrlab/rng.hpp"

using namespace dlrlab;

namespace {

std::string idx_image_bytes(std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                            const std::vector<unsigned char>& payload) {
  std::string bytes;
  const auto put_u32 = [&bytes](std::uint32_t v) {
    bytes.push_back(static_cast<char>(v >> 24));
    bytes.push_back(static_cast<char>(v >> 16));
    bytes.push_back(static_cast<char>(v >> 8));
    bytes.push_back(static_cast<char>(v));
  };
  put_u32(kIdxImageMagic);
  put_u32(count);
  put_u32(rows);
  put_u32(cols);
  bytes.append(payload.begin(), payload.end());
  return bytes;
}

std::string idx_label_bytes(std::uint32_t count, const std::vector<unsigned char>& payload) {
  std::string bytes;
  const auto put_u32 = [&bytes](std::uint32_t v) {
    bytes.push_back(static_cast<char>(v >> 24));
    bytes.push_back(static_cast<char>(v >> 16));
    bytes.push_back(static_cast<char>(v >> 8));
    bytes.push_back(static_cast<char>(v));
  };
  put_u32(kIdxLabelMagic);
  put_u32(count);
  bytes.append(payload.begin(), payload.end());
  return bytes;
}

}  // namespace

TEST_CASE("load_idx_images scales bytes into [0,1]") {
  std::vector<unsigned char> payload{0, 255, 128, 1};
  std::istringstream in(idx_image_bytes(1, 2, 2, payload));
  const auto set = load_idx_images(in);
  CHECK(set.count == 1);
  CHECK(set.rows == 2);
  CHECK(set.cols == 2);
  CHECK(set.pixels(0, 0) == 0.0);
  CHECK(set.pixels(0, 1) == 1.0);
  CHECK(set.pixels(0, 2) == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("load_idx_images parses a 10-image synthetic file") {
  std::vector<unsigned char> payload(10 * 28 * 28);
  Rng rng(7);
  for (auto& b : payload) b = static_cast<unsigned char>(rng.next_below(256));
  std::istringstream in(idx_image_bytes(10, 28, 28, payload));
  const auto set = load_idx_images(in);
  CHECK(set.count == 10);
  CHECK(set.rows == 28);
  CHECK(set.cols == 28);
  for (std::size_t n = 0; n < set.count; ++n)
    for (double p : set.pixels.row(n)) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
}

TEST_CASE("load_idx_images rejects bad magic and truncation") {
  std::istringstream bad_magic(idx_label_bytes(3, {1, 2, 3}));
  CHECK_THROWS_AS(load_idx_images(bad_magic), std::runtime_error);

  std::istringstream truncated(idx_image_bytes(10, 28, 28, std::vector<unsigned char>(100)));
  CHECK_THROWS_AS(load_idx_images(truncated), std::runtime_error);
}

TEST_CASE("load_idx_labels round-trip and validation") {
  std::istringstream in(idx_label_bytes(3, {5, 0, 4}));
  const auto set = load_idx_labels(in);
  CHECK(set.count == 3);
  CHECK(set.labels == std::vector<std::uint8_t>{5, 0, 4});

  std::istringstream out_of_range(idx_label_bytes(1, {10}));
  CHECK_THROWS_AS(load_idx_labels(out_of_range), std::runtime_error);

  std::istringstream empty(idx_label_bytes(0, {}));
  CHECK(load_idx_labels(empty).count == 0);

  std::istringstream bad_magic(idx_image_bytes(0, 0, 0, {}));
  CHECK_THROWS_AS(load_idx_labels(bad_magic), std::runtime_error);
}

TEST_CASE("idx round-trip reproduces image and label sets exactly") {
  std::vector<unsigned char> pixels(6 * 4 * 3);
  Rng rng(42);
  for (auto& b : pixels) b = static_cast<unsigned char>(rng.next_below(256));
  std::istringstream image_in(idx_image_bytes(6, 4, 3, pixels));
  const auto images = load_idx_images(image_in);

  std::ostringstream image_out;
  save_idx_images(image_out, images);
  std::istringstream image_again(image_out.str());
  const auto reloaded = load_idx_images(image_again);
  CHECK(reloaded.count == images.count);
  CHECK(reloaded.pixels == images.pixels);

  std::vector<unsigned char> labels{0, 9, 3, 3, 7, 1};
  std::istringstream label_in(idx_label_bytes(6, labels));
  const auto label_set = load_idx_labels(label_in);
  std::ostringstream label_out;
  save_idx_labels(label_out, label_set);
  CHECK(label_out.str() == label_in.str());
}

TEST_CASE("one_hot definition and bounds") {
  const auto v3 = one_hot(3);
  CHECK(v3 == std::array<double, 10>{0, 0, 0, 1, 0, 0, 0, 0, 0, 0});
  const auto v0 = one_hot(0);
  CHECK(v0 == std::array<double, 10>{1, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(one_hot(10), std::invalid_argument);
  CHECK_THROWS_AS(one_hot(-1), std::invalid_argument);
}

TEST_CASE("make_dataset builds one-hot targets and checks counts") {
  ImageSet images{2, 1, 2, Matrix(2, 2, 0.5)};
  LabelSet labels{2, {4, 0}};
  const auto data = make_dataset(images, labels);
  for (std::size_t n = 0; n < 2; ++n) {
    double sum = 0.0;
    for (double v : data.targets.row(n)) sum += v;
    CHECK(sum == 1.0);
    CHECK(data.targets(n, data.labels.labels[n]) == 1.0);
  }
  ImageSet mismatched{1, 1, 2, Matrix(1, 2)};
  CHECK_THROWS_AS(make_dataset(mismatched, labels), std::invalid_argument);
}

TEST_CASE("make_batches partitions a seeded permutation") {
  const auto exact = make_batches(std::size_t{6}, 2, 1, 0);
  CHECK(exact.size() == 3);
  for (const auto& b : exact) CHECK(b.size() == 2);

  const auto remainder = make_batches(std::size_t{5}, 2, 1, 0);
  CHECK(remainder.size() == 3);
  CHECK(remainder[0].size() == 2);
  CHECK(remainder[1].size() == 2);
  CHECK(remainder[2].size() == 1);

  CHECK_THROWS_AS(make_batches(std::size_t{5}, 0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_batches(std::size_t{0}, 2, 1, 0), std::invalid_argument);
}

TEST_CASE("batches cover every index exactly once") {
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    for (std::size_t count : {1uz, 7uz, 64uz, 1000uz}) {
      const auto batches = make_batches(count, 10, seed, 3);
      std::set<std::uint32_t> seen;
      std::size_t total = 0;
      for (const auto& b : batches) {
        total += b.size();
        seen.insert(b.begin(), b.end());
      }
      CHECK(total == count);
      CHECK(seen.size() == count);
      CHECK(*seen.rbegin() == count - 1);
    }
  }
}

TEST_CASE("batch order is deterministic in (seed, epoch)") {
  const auto a = make_batches(std::size_t{100}, 7, 123, 5);
  const auto b = make_batches(std::size_t{100}, 7, 123, 5);
  CHECK(a == b);
  const auto other_epoch = make_batches(std::size_t{100}, 7, 123, 6);
  CHECK(a != other_epoch);
  const auto other_seed = make_batches(std::size_t{100}, 7, 124, 5);
  CHECK(a != other_seed);
}

TEST_CASE("real MNIST loads when DLRLAB_DATA_DIR is set") {
  const char* dir = std::getenv("DLRLAB_DATA_DIR");
  if (!dir) {
    MESSAGE("DLRLAB_DATA_DIR not set; skipping");
    return;
  }
  const auto test = load_mnist_test(dir);
  CHECK(test.count() == 10000);
  CHECK(test.images.rows == 28);
  CHECK(test.images.cols == 28);
  // canonical first labels of the test split
  CHECK(test.labels.labels[0] == 7);
  CHECK(test.labels.labels[1] == 2);
  CHECK(test.labels.labels[2] == 1);
}
