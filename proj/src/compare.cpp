#include "softtarget/compare.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "softtarget/errors.hpp"

namespace softtarget {

namespace {

std::size_t index_of(std::vector<std::string>& labels, const std::string& label) {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it != labels.end()) return static_cast<std::size_t>(it - labels.begin());
    labels.push_back(label);
    return labels.size() - 1;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

ComparisonTable compare_runs(const std::vector<TrainReport>& reports) {
    if (reports.empty()) throw ValueError("compare_runs: no reports given");
    for (const TrainReport& r : reports) {
        if (!(r.dataset == reports.front().dataset)) {
            throw ValueError("compare_runs: reports describe different datasets: \"" +
                             r.dataset.description + "\" vs \"" +
                             reports.front().dataset.description + "\"");
        }
    }

    ComparisonTable table;
    struct Acc {
        Summary sum;
        std::size_t runs = 0;
    };
    std::vector<std::vector<Acc>> acc;
    for (const TrainReport& r : reports) {
        const std::size_t row = index_of(table.architectures, r.arch_label);
        const std::size_t col = index_of(table.regimes, r.regime);
        if (acc.size() < table.architectures.size()) acc.resize(table.architectures.size());
        for (auto& rowv : acc) rowv.resize(table.regimes.size());
        Acc& a = acc[row][col];
        a.sum.min_test_loss += r.summary.min_test_loss;
        a.sum.last_epoch_test_loss += r.summary.last_epoch_test_loss;
        a.sum.max_test_accuracy += r.summary.max_test_accuracy;
        a.runs += 1;
    }

    table.cells.assign(table.architectures.size(),
                       std::vector<std::optional<ComparisonCell>>(table.regimes.size()));
    for (std::size_t row = 0; row < acc.size(); ++row) {
        for (std::size_t col = 0; col < acc[row].size(); ++col) {
            if (acc[row][col].runs == 0) continue;
            ComparisonCell cell;
            const double n = static_cast<double>(acc[row][col].runs);
            cell.mean.min_test_loss = acc[row][col].sum.min_test_loss / n;
            cell.mean.last_epoch_test_loss = acc[row][col].sum.last_epoch_test_loss / n;
            cell.mean.max_test_accuracy = acc[row][col].sum.max_test_accuracy / n;
            cell.runs = acc[row][col].runs;
            table.cells[row][col] = cell;
        }
    }

    // Best-in-row marks; exact ties are all marked.
    for (auto& row : table.cells) {
        double best_min = 0.0, best_last = 0.0, best_acc = 0.0;
        bool any = false;
        for (const auto& cell : row) {
            if (!cell) continue;
            if (!any) {
                best_min = cell->mean.min_test_loss;
                best_last = cell->mean.last_epoch_test_loss;
                best_acc = cell->mean.max_test_accuracy;
                any = true;
            } else {
                best_min = std::min(best_min, cell->mean.min_test_loss);
                best_last = std::min(best_last, cell->mean.last_epoch_test_loss);
                best_acc = std::max(best_acc, cell->mean.max_test_accuracy);
            }
        }
        for (auto& cell : row) {
            if (!cell) continue;
            cell->best_min_loss = cell->mean.min_test_loss == best_min;
            cell->best_last_loss = cell->mean.last_epoch_test_loss == best_last;
            cell->best_accuracy = cell->mean.max_test_accuracy == best_acc;
        }
    }
    return table;
}

std::string comparison_to_markdown(const ComparisonTable& table) {
    std::ostringstream out;
    out << "| Net |";
    for (const std::string& regime : table.regimes) out << " " << regime << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < table.regimes.size(); ++i) out << "---|";
    out << "\n";
    for (std::size_t row = 0; row < table.architectures.size(); ++row) {
        out << "| " << table.architectures[row] << " |";
        for (const auto& cell : table.cells[row]) {
            if (!cell) {
                out << " - |";
                continue;
            }
            auto part = [&](double v, bool best) {
                return best ? "**" + fmt3(v) + "**" : fmt3(v);
            };
            out << " " << part(cell->mean.min_test_loss, cell->best_min_loss) << "\\|"
                << part(cell->mean.last_epoch_test_loss, cell->best_last_loss) << "\\|"
                << part(cell->mean.max_test_accuracy, cell->best_accuracy);
            if (cell->runs > 1) out << " (n=" << cell->runs << ")";
            out << " |";
        }
        out << "\n";
    }
    return out.str();
}

std::string comparison_to_csv(const ComparisonTable& table) {
    std::ostringstream out;
    out << "architecture";
    for (const std::string& regime : table.regimes) {
        out << "," << regime << ".min_loss," << regime << ".last_loss," << regime << ".max_acc,"
            << regime << ".runs";
    }
    out << ",best_min_loss,best_last_loss,best_max_acc\n";
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t row = 0; row < table.architectures.size(); ++row) {
        out << table.architectures[row];
        std::string best_min, best_last, best_acc;
        for (std::size_t col = 0; col < table.regimes.size(); ++col) {
            const auto& cell = table.cells[row][col];
            if (!cell) {
                out << ",,,,0";
                continue;
            }
            out << "," << num(cell->mean.min_test_loss) << ","
                << num(cell->mean.last_epoch_test_loss) << "," << num(cell->mean.max_test_accuracy)
                << "," << cell->runs;
            auto append = [&](std::string& to) {
                if (!to.empty()) to += ";";
                to += table.regimes[col];
            };
            if (cell->best_min_loss) append(best_min);
            if (cell->best_last_loss) append(best_last);
            if (cell->best_accuracy) append(best_acc);
        }
        out << "," << best_min << "," << best_last << "," << best_acc << "\n";
    }
    return out.str();
}

}  // namespace softtarget
