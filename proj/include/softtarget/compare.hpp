#pragma once

#include <optional>
#include <string>
#include <vector>

#include "softtarget/experiment.hpp"

namespace softtarget {

/// One architecture x regime cell: the summary triple averaged over however
/// many runs (seeds) landed in the cell, with best-in-row marks per component.
struct ComparisonCell {
    Summary mean;
    std::size_t runs = 0;
    bool best_min_loss = false;
    bool best_last_loss = false;
    bool best_accuracy = false;
};

struct ComparisonTable {
    std::vector<std::string> architectures;  // row labels
    std::vector<std::string> regimes;        // column labels
    // cells[row][col]; empty optional when no run covered that cell
    std::vector<std::vector<std::optional<ComparisonCell>>> cells;
};

/// Builds the architecture x regime grid from a set of reports. All reports
/// must describe the same dataset; ties for best are marked on every tied cell.
/// Throws ValueError on an empty list or a dataset mismatch.
ComparisonTable compare_runs(const std::vector<TrainReport>& reports);

/// Markdown grid with min|last|max-accuracy triples, best-in-row values bold.
std::string comparison_to_markdown(const ComparisonTable& table);

/// Machine-readable CSV: one row per architecture, three value columns per
/// regime, plus best_* columns naming the winning regime(s) per component.
std::string comparison_to_csv(const ComparisonTable& table);

}  // namespace softtarget
