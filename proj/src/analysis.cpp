#include "softtarget/analysis.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "softtarget/errors.hpp"

namespace softtarget {

CoLabelMatrix colabel_covariance(const Matrix& predictions) {
    const std::size_t n = predictions.rows();
    const std::size_t k = predictions.cols();
    if (n < 2) {
        throw ValueError("colabel_covariance: need at least 2 samples, got " + std::to_string(n));
    }

    std::vector<double> mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = predictions.row_ptr(i);
        for (std::size_t c = 0; c < k; ++c) mean[c] += row[c];
    }
    for (double& m : mean) m /= static_cast<double>(n);

    CoLabelMatrix out;
    out.k = k;
    out.raw = Matrix(k, k);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = predictions.row_ptr(i);
        for (std::size_t a = 0; a < k; ++a) {
            const double da = row[a] - mean[a];
            double* raw_row = out.raw.row_ptr(a);
            for (std::size_t b = a + 1; b < k; ++b) {
                raw_row[b] += da * (row[b] - mean[b]);
            }
        }
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            out.raw(a, b) /= static_cast<double>(n - 1);
            out.raw(b, a) = out.raw(a, b);
        }
        out.raw(a, a) = 0.0;
    }

    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            const double v = out.raw(a, b);
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                if (v < lo) lo = v;
                if (v > hi) hi = v;
            }
        }
    }

    out.scaled = Matrix(k, k);
    if (first || hi == lo) {
        out.degenerate = true;
        return out;
    }
    const double range = hi - lo;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            out.scaled(a, b) = (out.raw(a, b) - lo) / range;
        }
    }
    return out;
}

Matrix binarize_predictions(const Matrix& predictions) {
    Matrix out(predictions.rows(), predictions.cols());
    for (std::size_t r = 0; r < predictions.rows(); ++r) {
        const double* row = predictions.row_ptr(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < predictions.cols(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        out(r, best) = 1.0;
    }
    return out;
}

std::vector<CoLabelMatrix> covariance_trajectory(const std::vector<Network>& checkpoints,
                                                 const Matrix& x) {
    std::vector<CoLabelMatrix> out;
    out.reserve(checkpoints.size());
    for (const Network& net : checkpoints) {
        out.push_back(colabel_covariance(net.infer_in_batches(x)));
    }
    return out;
}

std::pair<std::size_t, std::size_t> max_offdiag_pair(const CoLabelMatrix& m) {
    std::pair<std::size_t, std::size_t> best{0, 1};
    double best_v = -1.0;
    for (std::size_t a = 0; a < m.k; ++a) {
        for (std::size_t b = a + 1; b < m.k; ++b) {
            if (m.scaled(a, b) > best_v) {
                best_v = m.scaled(a, b);
                best = {a, b};
            }
        }
    }
    return best;
}

namespace {

std::string class_label(const std::vector<std::string>& names, std::size_t i) {
    return i < names.size() ? names[i] : "class_" + std::to_string(i);
}

void format_value(std::ofstream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

void write_colabel_csv(const CoLabelMatrix& m, const std::vector<std::string>& class_names,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t c = 0; c < m.k; ++c) {
        if (c) out << ",";
        out << class_label(class_names, c);
    }
    out << "\n";
    for (std::size_t a = 0; a < m.k; ++a) {
        for (std::size_t b = 0; b < m.k; ++b) {
            if (b) out << ",";
            format_value(out, m.scaled(a, b));
        }
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

void write_colabel_long_csv(const CoLabelMatrix& m, const std::vector<std::string>& class_names,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "class_a,class_b,value\n";
    for (std::size_t a = 0; a < m.k; ++a) {
        for (std::size_t b = 0; b < m.k; ++b) {
            out << class_label(class_names, a) << "," << class_label(class_names, b) << ",";
            format_value(out, m.scaled(a, b));
            out << "\n";
        }
    }
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace softtarget
