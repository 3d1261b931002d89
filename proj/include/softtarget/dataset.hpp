#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "softtarget/matrix.hpp"
#include "softtarget/rng.hpp"

namespace softtarget {

/// A labeled dataset: one sample per row. x holds features, y one-hot labels.
/// Values are immutable in practice; loaders hand out fresh copies.
struct Dataset {
    Matrix x;  // N x D
    Matrix y;  // N x K, one-hot
    std::vector<std::string> class_names;  // size K, or empty

    std::size_t size() const noexcept { return x.rows(); }
    std::size_t dim() const noexcept { return x.cols(); }
    std::size_t classes() const noexcept { return y.cols(); }
};

/// Loads an IDX image/label file pair (the MNIST distribution format: big-endian
/// magic 0x00000803 for images, 0x00000801 for labels). Pixels are scaled to
/// [0, 1] by /255 and flattened row-major; labels become one-hot rows.
/// k = 0 derives the class count as max(label) + 1.
/// Throws ParseError with a distinct kind for bad magic, truncation, and an
/// image/label count mismatch; IoError when a file cannot be opened.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t k = 0);

/// Writes a dataset back out as an IDX pair. Pixels are stored as
/// round(x * 255) clamped to [0, 255], so data loaded by load_idx round-trips
/// bit-exactly. img_rows/img_cols must multiply to dim(); both 0 picks 28x28
/// when dim() == 784 and 1 x dim() otherwise.
void save_idx(const Dataset& data, const std::string& images_path,
              const std::string& labels_path, std::size_t img_rows = 0,
              std::size_t img_cols = 0);

/// One-hot encodes labels into an N x k matrix. Throws ValueError (naming the
/// offending index) when a label falls outside [0, k).
Matrix one_hot(const std::vector<std::size_t>& labels, std::size_t k);

/// Argmax of each one-hot (or soft) row.
std::vector<std::size_t> labels_of(const Matrix& y);

/// Deterministic Gaussian-cluster classification data in [0, 1]^dim.
///
/// Centers are drawn inside [0.25, 0.75]^dim; each class contributes
/// `per_class` samples at center + spread * N(0, I), clipped to [0, 1] (pixel
/// saturation). For every (a, b) in overlap_pairs, class b's center is moved to
/// within `spread` of class a's (at distance spread / 2), so a trained
/// classifier confuses the pair. Rows are ordered class-major.
Dataset synth_clusters(std::size_t k, std::size_t per_class, std::size_t dim, double spread,
                       const std::vector<std::pair<std::size_t, std::size_t>>& overlap_pairs,
                       Rng& rng);

/// Splits into (train, test) with round(N * test_fraction) test rows, chosen by
/// one permutation from `rng`; the two sides never overlap.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double test_fraction, Rng& rng);

/// Keeps the first n rows (n = 0 keeps everything).
Dataset head_subset(const Dataset& data, std::size_t n);

/// CSV export: header x0..x{D-1},label then one row per sample.
void dataset_to_csv(const Dataset& data, const std::string& path);

}  // namespace softtarget
