#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dlrlab/matrix.hpp"

namespace dlrlab {

/// Images decoded from an IDX container, pixels scaled to [0,1].
struct ImageSet {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Matrix pixels;  // count x (rows*cols)
};

struct LabelSet {
  std::size_t count = 0;
  std::vector<std::uint8_t> labels;  // each in [0,9]
};

/// Paired images/labels plus one-hot targets, ready for training.
struct Dataset {
  ImageSet images;
  LabelSet labels;
  Matrix targets;  // count x 10

  std::size_t count() const { return images.count; }
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

ImageSet load_idx_images(std::istream& in);
LabelSet load_idx_labels(std::istream& in);
ImageSet load_idx_images(const std::string& path);
LabelSet load_idx_labels(const std::string& path);

/// Inverse of the loaders; pixel values are rescaled back to raw bytes.
void save_idx_images(std::ostream& out, const ImageSet& images);
void save_idx_labels(std::ostream& out, const LabelSet& labels);

std::array<double, 10> one_hot(int label);

Dataset make_dataset(ImageSet images, LabelSet labels);

/// Loads the four standard MNIST files from a directory.
struct MnistPaths {
  std::string train_images, train_labels, test_images, test_labels;
};
MnistPaths mnist_paths(const std::string& dir);
Dataset load_mnist_train(const std::string& dir);
Dataset load_mnist_test(const std::string& dir);

/// Seeded index batches for one epoch: a permutation of [0, count) chopped into
/// batch_size pieces, the final one possibly smaller. The permutation depends
/// only on (seed, epoch_index).
std::vector<std::vector<std::uint32_t>> make_batches(std::size_t count, std::size_t batch_size,
                                                     std::uint64_t seed, std::uint64_t epoch_index);
std::vector<std::vector<std::uint32_t>> make_batches(const Dataset& data, std::size_t batch_size,
                                                     std::uint64_t seed, std::uint64_t epoch_index);

/// Copies the selected rows of a dataset into dense input/target matrices.
void gather_batch(const Dataset& data, const std::vector<std::uint32_t>& indices, Matrix& x,
                  Matrix& y);

}  // namespace dlrlab
