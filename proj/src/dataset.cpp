#include "softtarget/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "softtarget/errors.hpp"

namespace softtarget {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::string& path) {
    if (offset + 4 > bytes.size()) {
        throw ParseError(ParseError::Kind::Truncated, path + ": truncated header");
    }
    return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
           (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path, std::size_t k) {
    const auto img = read_file(images_path);
    const std::uint32_t img_magic = read_be32(img, 0, images_path);
    if (img_magic != kImagesMagic) {
        throw ParseError(ParseError::Kind::BadMagic,
                         images_path + ": expected image magic 0x00000803, got 0x" +
                             [&] { char b[16]; std::snprintf(b, sizeof b, "%08x", img_magic); return std::string(b); }());
    }
    const std::size_t n = read_be32(img, 4, images_path);
    const std::size_t rows = read_be32(img, 8, images_path);
    const std::size_t cols = read_be32(img, 12, images_path);
    const std::size_t dim = rows * cols;
    if (img.size() < 16 + n * dim) {
        throw ParseError(ParseError::Kind::Truncated,
                         images_path + ": payload holds " + std::to_string(img.size() - 16) +
                             " bytes, header promises " + std::to_string(n * dim));
    }

    const auto lbl = read_file(labels_path);
    const std::uint32_t lbl_magic = read_be32(lbl, 0, labels_path);
    if (lbl_magic != kLabelsMagic) {
        throw ParseError(ParseError::Kind::BadMagic,
                         labels_path + ": expected label magic 0x00000801, got 0x" +
                             [&] { char b[16]; std::snprintf(b, sizeof b, "%08x", lbl_magic); return std::string(b); }());
    }
    const std::size_t n_lbl = read_be32(lbl, 4, labels_path);
    if (lbl.size() < 8 + n_lbl) {
        throw ParseError(ParseError::Kind::Truncated,
                         labels_path + ": payload holds " + std::to_string(lbl.size() - 8) +
                             " bytes, header promises " + std::to_string(n_lbl));
    }
    if (n != n_lbl) {
        throw ParseError(ParseError::Kind::CountMismatch,
                         images_path + " holds " + std::to_string(n) + " images but " +
                             labels_path + " holds " + std::to_string(n_lbl) + " labels");
    }

    Dataset data;
    data.x = Matrix(n, dim);
    for (std::size_t i = 0; i < n * dim; ++i) {
        data.x.data()[i] = static_cast<double>(img[16 + i]) / 255.0;
    }

    std::vector<std::size_t> labels(n);
    std::size_t max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = lbl[8 + i];
        max_label = std::max(max_label, labels[i]);
    }
    if (k == 0) k = max_label + 1;
    data.y = one_hot(labels, k);
    data.class_names.reserve(k);
    for (std::size_t c = 0; c < k; ++c) data.class_names.push_back(std::to_string(c));
    return data;
}

void save_idx(const Dataset& data, const std::string& images_path, const std::string& labels_path,
              std::size_t img_rows, std::size_t img_cols) {
    if (img_rows == 0 && img_cols == 0) {
        if (data.dim() == 784) {
            img_rows = img_cols = 28;
        } else {
            img_rows = 1;
            img_cols = data.dim();
        }
    }
    if (img_rows * img_cols != data.dim()) {
        throw ValueError("save_idx: " + std::to_string(img_rows) + "x" + std::to_string(img_cols) +
                         " does not cover dim " + std::to_string(data.dim()));
    }
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw IoError("cannot write " + images_path);
    write_be32(img, kImagesMagic);
    write_be32(img, static_cast<std::uint32_t>(data.size()));
    write_be32(img, static_cast<std::uint32_t>(img_rows));
    write_be32(img, static_cast<std::uint32_t>(img_cols));
    for (double v : data.x.data()) {
        const double scaled = std::round(v * 255.0);
        const double clamped = std::min(255.0, std::max(0.0, scaled));
        const unsigned char byte = static_cast<unsigned char>(clamped);
        img.write(reinterpret_cast<const char*>(&byte), 1);
    }
    if (!img) throw IoError("failed writing " + images_path);

    std::ofstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw IoError("cannot write " + labels_path);
    write_be32(lbl, kLabelsMagic);
    write_be32(lbl, static_cast<std::uint32_t>(data.size()));
    const auto labels = labels_of(data.y);
    for (std::size_t v : labels) {
        const unsigned char byte = static_cast<unsigned char>(v);
        lbl.write(reinterpret_cast<const char*>(&byte), 1);
    }
    if (!lbl) throw IoError("failed writing " + labels_path);
}

Matrix one_hot(const std::vector<std::size_t>& labels, std::size_t k) {
    Matrix out(labels.size(), k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= k) {
            throw ValueError("one_hot: label " + std::to_string(labels[i]) + " at index " +
                             std::to_string(i) + " is outside [0, " + std::to_string(k) + ")");
        }
        out(i, labels[i]) = 1.0;
    }
    return out;
}

std::vector<std::size_t> labels_of(const Matrix& y) {
    std::vector<std::size_t> labels(y.rows());
    for (std::size_t r = 0; r < y.rows(); ++r) {
        const double* row = y.row_ptr(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < y.cols(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        labels[r] = best;
    }
    return labels;
}

Dataset synth_clusters(std::size_t k, std::size_t per_class, std::size_t dim, double spread,
                       const std::vector<std::pair<std::size_t, std::size_t>>& overlap_pairs,
                       Rng& rng) {
    if (k < 2) throw ValueError("synth_clusters: need at least 2 classes");
    if (dim < 1) throw ValueError("synth_clusters: need at least 1 dimension");
    if (spread < 0.0) throw ValueError("synth_clusters: spread must be >= 0");

    std::vector<std::vector<double>> centers(k, std::vector<double>(dim));
    for (auto& center : centers) {
        for (double& c : center) c = rng.uniform(0.25, 0.75);
    }
    for (const auto& [a, b] : overlap_pairs) {
        if (a >= k || b >= k) {
            throw ValueError("synth_clusters: overlap pair (" + std::to_string(a) + ", " +
                             std::to_string(b) + ") names a class outside [0, " + std::to_string(k) +
                             ")");
        }
        // Move b's center to distance spread/2 from a's, along a random direction.
        std::vector<double> dir(dim);
        double norm = 0.0;
        for (double& d : dir) {
            d = rng.normal();
            norm += d * d;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) norm = 1.0;
        for (std::size_t j = 0; j < dim; ++j) {
            centers[b][j] = centers[a][j] + dir[j] / norm * (spread * 0.5);
        }
    }

    Dataset data;
    data.x = Matrix(k * per_class, dim);
    std::vector<std::size_t> labels(k * per_class);
    std::size_t row = 0;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            double* out = data.x.row_ptr(row);
            for (std::size_t j = 0; j < dim; ++j) {
                const double v = centers[c][j] + spread * rng.normal();
                out[j] = std::min(1.0, std::max(0.0, v));
            }
            labels[row] = c;
        }
    }
    data.y = one_hot(labels, k);
    data.class_names.reserve(k);
    for (std::size_t c = 0; c < k; ++c) data.class_names.push_back("class_" + std::to_string(c));
    return data;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double test_fraction, Rng& rng) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
        throw ValueError("split_dataset: test_fraction must lie in [0, 1)");
    }
    const std::size_t n = data.size();
    const std::size_t n_test =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    const auto perm = random_permutation(n, rng);
    std::vector<std::size_t> test_idx(perm.begin(), perm.begin() + n_test);
    std::vector<std::size_t> train_idx(perm.begin() + n_test, perm.end());

    Dataset train{gather_rows(data.x, train_idx), gather_rows(data.y, train_idx),
                  data.class_names};
    Dataset test{gather_rows(data.x, test_idx), gather_rows(data.y, test_idx), data.class_names};
    return {std::move(train), std::move(test)};
}

Dataset head_subset(const Dataset& data, std::size_t n) {
    if (n == 0 || n >= data.size()) return data;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return Dataset{gather_rows(data.x, idx), gather_rows(data.y, idx), data.class_names};
}

void dataset_to_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t j = 0; j < data.dim(); ++j) out << "x" << j << ",";
    out << "label\n";
    const auto labels = labels_of(data.y);
    char buf[32];
    for (std::size_t r = 0; r < data.size(); ++r) {
        const double* row = data.x.row_ptr(r);
        for (std::size_t j = 0; j < data.dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row[j]);
            out << buf << ",";
        }
        out << labels[r] << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace softtarget
