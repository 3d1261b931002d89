#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "softtarget/matrix.hpp"
#include "softtarget/network.hpp"

namespace softtarget {

/// Co-label covariance of a prediction matrix: how strongly the predicted
/// probabilities of two classes move together across samples. Related classes
/// co-vary while a model still carries their similarity structure; the signal
/// washing out is the over-fitting symptom this diagnostic tracks.
struct CoLabelMatrix {
    std::size_t k = 0;
    /// Sample covariance between prediction columns, diagonal forced to zero.
    Matrix raw;
    /// raw min-max scaled to [0, 1] over the off-diagonal entries only (the
    /// forced diagonal zeros would otherwise distort the range). All zeros when
    /// degenerate. Ties for the min/max are broken by first occurrence in
    /// row-major order.
    Matrix scaled;
    /// True when every off-diagonal entry is identical (e.g. constant
    /// predictions), leaving nothing to scale.
    bool degenerate = false;
};

/// Computes the co-label covariance of an N x K prediction matrix whose rows
/// are probability distributions. Requires N >= 2.
CoLabelMatrix colabel_covariance(const Matrix& predictions);

/// Replaces each row by the one-hot of its argmax (first index wins ties); the
/// harder-edged variant of the diagnostic.
Matrix binarize_predictions(const Matrix& predictions);

/// One CoLabelMatrix per checkpoint, from inference-mode predictions on x.
std::vector<CoLabelMatrix> covariance_trajectory(const std::vector<Network>& checkpoints,
                                                 const Matrix& x);

/// Row/column indices of the largest off-diagonal scaled entry, (a, b) with a < b.
std::pair<std::size_t, std::size_t> max_offdiag_pair(const CoLabelMatrix& m);

/// Wide CSV: one header row of K class names, then the K x K scaled values.
void write_colabel_csv(const CoLabelMatrix& m, const std::vector<std::string>& class_names,
                       const std::string& path);

/// Long CSV for plotting tools: class_a,class_b,value with one row per cell.
void write_colabel_long_csv(const CoLabelMatrix& m, const std::vector<std::string>& class_names,
                            const std::string& path);

}  // namespace softtarget
