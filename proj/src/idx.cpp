#include "dlrlab/idx.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "dlrlab/rng.hpp"

namespace dlrlab {

namespace {

std::uint32_t read_u32_be(std::istream& in, const char* what) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4))
    throw std::runtime_error(std::string("IDX: truncated header while reading ") + what);
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

}  // namespace

ImageSet load_idx_images(std::istream& in) {
  const std::uint32_t magic = read_u32_be(in, "image magic");
  if (magic != kIdxImageMagic)
    throw std::runtime_error("IDX: bad image magic " + std::to_string(magic));
  ImageSet set;
  set.count = read_u32_be(in, "image count");
  set.rows = read_u32_be(in, "image rows");
  set.cols = read_u32_be(in, "image cols");
  const std::size_t dim = set.rows * set.cols;
  set.pixels = Matrix(set.count, dim);
  std::vector<unsigned char> raw(dim);
  for (std::size_t n = 0; n < set.count; ++n) {
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(dim)))
      throw std::runtime_error("IDX: truncated image payload at image " + std::to_string(n));
    auto row = set.pixels.row(n);
    for (std::size_t i = 0; i < dim; ++i) row[i] = raw[i] / 255.0;
  }
  return set;
}

LabelSet load_idx_labels(std::istream& in) {
  const std::uint32_t magic = read_u32_be(in, "label magic");
  if (magic != kIdxLabelMagic)
    throw std::runtime_error("IDX: bad label magic " + std::to_string(magic));
  LabelSet set;
  set.count = read_u32_be(in, "label count");
  set.labels.resize(set.count);
  if (set.count > 0 &&
      !in.read(reinterpret_cast<char*>(set.labels.data()), static_cast<std::streamsize>(set.count)))
    throw std::runtime_error("IDX: truncated label payload");
  for (std::size_t n = 0; n < set.count; ++n)
    if (set.labels[n] > 9)
      throw std::runtime_error("IDX: label out of range [0,9] at index " + std::to_string(n) +
                               ": " + std::to_string(set.labels[n]));
  return set;
}

ImageSet load_idx_images(const std::string& path) {
  auto in = open_binary(path);
  return load_idx_images(in);
}

LabelSet load_idx_labels(const std::string& path) {
  auto in = open_binary(path);
  return load_idx_labels(in);
}

void save_idx_images(std::ostream& out, const ImageSet& images) {
  write_u32_be(out, kIdxImageMagic);
  write_u32_be(out, static_cast<std::uint32_t>(images.count));
  write_u32_be(out, static_cast<std::uint32_t>(images.rows));
  write_u32_be(out, static_cast<std::uint32_t>(images.cols));
  const std::size_t dim = images.rows * images.cols;
  std::vector<unsigned char> raw(dim);
  for (std::size_t n = 0; n < images.count; ++n) {
    auto row = images.pixels.row(n);
    for (std::size_t i = 0; i < dim; ++i)
      raw[i] = static_cast<unsigned char>(std::lround(row[i] * 255.0));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(dim));
  }
}

void save_idx_labels(std::ostream& out, const LabelSet& labels) {
  write_u32_be(out, kIdxLabelMagic);
  write_u32_be(out, static_cast<std::uint32_t>(labels.count));
  out.write(reinterpret_cast<const char*>(labels.labels.data()),
            static_cast<std::streamsize>(labels.count));
}

std::array<double, 10> one_hot(int label) {
  if (label < 0 || label > 9)
    throw std::invalid_argument("one_hot: label out of range [0,9]: " + std::to_string(label));
  std::array<double, 10> v{};
  v[static_cast<std::size_t>(label)] = 1.0;
  return v;
}

Dataset make_dataset(ImageSet images, LabelSet labels) {
  if (images.count != labels.count)
    throw std::invalid_argument("make_dataset: image/label count mismatch (" +
                                std::to_string(images.count) + " vs " +
                                std::to_string(labels.count) + ")");
  Dataset data;
  data.targets = Matrix(labels.count, 10);
  for (std::size_t n = 0; n < labels.count; ++n) data.targets(n, labels.labels[n]) = 1.0;
  data.images = std::move(images);
  data.labels = std::move(labels);
  return data;
}

MnistPaths mnist_paths(const std::string& dir) {
  return MnistPaths{dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte",
                    dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte"};
}

Dataset load_mnist_train(const std::string& dir) {
  auto p = mnist_paths(dir);
  return make_dataset(load_idx_images(p.train_images), load_idx_labels(p.train_labels));
}

Dataset load_mnist_test(const std::string& dir) {
  auto p = mnist_paths(dir);
  return make_dataset(load_idx_images(p.test_images), load_idx_labels(p.test_labels));
}

std::vector<std::vector<std::uint32_t>> make_batches(std::size_t count, std::size_t batch_size,
                                                     std::uint64_t seed,
                                                     std::uint64_t epoch_index) {
  if (batch_size == 0) throw std::invalid_argument("make_batches: batch_size must be >= 1");
  if (count == 0) throw std::invalid_argument("make_batches: empty dataset");
  const auto perm = random_permutation(count, derive_seed(seed, epoch_index));
  std::vector<std::vector<std::uint32_t>> batches;
  batches.reserve((count + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                         perm.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<std::vector<std::uint32_t>> make_batches(const Dataset& data, std::size_t batch_size,
                                                     std::uint64_t seed,
                                                     std::uint64_t epoch_index) {
  return make_batches(data.count(), batch_size, seed, epoch_index);
}

void gather_batch(const Dataset& data, const std::vector<std::uint32_t>& indices, Matrix& x,
                  Matrix& y) {
  const std::size_t dim = data.images.pixels.cols();
  if (x.rows() != indices.size() || x.cols() != dim) x = Matrix(indices.size(), dim);
  if (y.rows() != indices.size() || y.cols() != 10) y = Matrix(indices.size(), 10);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    std::memcpy(x.row(b).data(), data.images.pixels.row(indices[b]).data(), dim * sizeof(double));
    std::memcpy(y.row(b).data(), data.targets.row(indices[b]).data(), 10 * sizeof(double));
  }
}

}  // namespace dlrlab
