#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "softtarget/adadelta.hpp"
#include "softtarget/checkpoint.hpp"
#include "softtarget/dataset.hpp"
#include "softtarget/network.hpp"
#include "softtarget/softtarget.hpp"

namespace softtarget {

/// Fully connected architecture in the "H <- U" notation: H hidden layers of U
/// ReLU units each, followed by a softmax output layer.
struct ArchSpec {
    std::size_t hidden_layers = 3;
    std::size_t hidden_units = 256;
};

/// SoftTarget hyper-parameters as configured; the total epoch count n comes
/// from ExperimentConfig::epochs.
struct SoftTargetParams {
    double beta = 0.7;
    double gamma = 0.5;
    std::size_t burn_in = 2;
    std::size_t epochs_per_step = 2;

    SoftTargetConfig with_total_epochs(std::size_t n) const {
        return SoftTargetConfig{beta, gamma, burn_in, epochs_per_step, n};
    }
};

struct IdxPaths {
    std::string train_images, train_labels, test_images, test_labels;
    std::size_t train_subset = 0;  // keep only the first N training samples; 0 = all
};

struct SynthParams {
    std::size_t classes = 10;
    std::size_t per_class = 1200;
    std::size_t dim = 784;
    double spread = 0.3;
    std::vector<std::pair<std::size_t, std::size_t>> overlap_pairs;
    double test_fraction = 1.0 / 6.0;
    std::uint64_t data_seed = 7;
};

struct DatasetSource {
    enum class Kind { Idx, Synth };
    Kind kind = Kind::Synth;
    IdxPaths idx;
    SynthParams synth;
};

struct ExperimentConfig {
    DatasetSource dataset;
    ArchSpec arch;
    double dropout = 0.0;  // 0 disables Dropout layers
    std::optional<SoftTargetParams> softtarget;
    AdadeltaConfig optimizer;
    std::size_t batch_size = 128;
    std::size_t epochs = 100;
    std::uint64_t seed = 1;
    std::string output_dir;        // empty = no files written
    std::size_t checkpoint_every = 0;  // also writes a final checkpoint when output_dir is set
    std::size_t colabel_every = 0;     // co-label covariance CSVs every N epochs
    bool dump_yhat = false;            // y_hat CSV per time-step

    void validate() const;  // throws ValueError
};

enum class TrainPhase { Vanilla, BurnIn, SoftTarget };
const char* train_phase_name(TrainPhase phase);

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based over the whole run
    TrainPhase phase = TrainPhase::Vanilla;
    double train_loss = 0.0;       // on the targets actually optimized (blended during SoftTarget)
    double train_loss_hard = 0.0;  // same predictions scored against the hard labels
    double test_loss = 0.0;        // inference mode, hard test labels
    double test_accuracy = 0.0;
    double wall_ms = 0.0;  // kept out of epochs.csv so reruns stay byte-identical
};

struct Summary {
    double min_test_loss = 0.0;
    double last_epoch_test_loss = 0.0;
    double max_test_accuracy = 0.0;
};

struct DatasetInfo {
    std::string description;
    std::size_t n_train = 0, n_test = 0, dim = 0, classes = 0;

    bool operator==(const DatasetInfo&) const = default;
};

struct TrainReport {
    std::string arch_label;   // e.g. "3<-256"
    std::string regime;       // e.g. "softtarget+dropout(0.2)"
    std::uint64_t seed = 0;
    DatasetInfo dataset;
    std::vector<EpochRecord> epochs;
    Summary summary;
};

/// (min test loss, test loss at the final epoch, max test accuracy) recomputed
/// from the per-epoch series. Throws ValueError on an empty series.
Summary summarize(const TrainReport& report);

std::string arch_label(const ArchSpec& arch);
std::string regime_label(const ExperimentConfig& config);

/// Sequential training loop for one experiment. Owns the network, optimizer,
/// SoftTarget state and rng streams; nothing is shared across threads.
class Trainer {
public:
    Trainer(const ExperimentConfig& config, Dataset train, Dataset test);

    /// Fired after every trained epoch.
    std::function<void(const EpochRecord&)> on_epoch;
    /// Fired once per time-step after the EMA update and blend, with t, the
    /// running average, and the blended targets about to be trained on.
    std::function<void(std::size_t, const Matrix&, const Matrix&)> on_time_step;

    /// Runs from the current epoch counter to the end of the schedule. The
    /// returned report covers the epochs executed by this call.
    TrainReport run();

    Checkpoint make_checkpoint() const;
    /// Restores a mid-run state previously produced by make_checkpoint(); a
    /// subsequent run() continues bit-exactly where the checkpoint was taken.
    void restore_checkpoint(const Checkpoint& ckpt);

    const Network& network() const noexcept { return net_; }
    const Dataset& train_data() const noexcept { return train_; }
    std::size_t epochs_completed() const noexcept { return epochs_done_; }

private:
    EpochRecord train_one_epoch(const Matrix& targets, TrainPhase phase);
    Matrix refresh_predictions() const;

    ExperimentConfig config_;
    Dataset train_, test_;
    Network net_;
    AdadeltaState opt_;
    Rng shuffle_rng_;
    Rng dropout_rng_;
    std::optional<SoftTargetState> soft_;
    Matrix blended_targets_;
    std::size_t epochs_done_ = 0;
    std::vector<EpochRecord> records_;
};

/// Loads (or synthesizes) the configured dataset. Relative IDX paths resolve
/// against $SOFTTARGET_DATA_DIR when it is set.
std::pair<Dataset, Dataset> load_dataset(const DatasetSource& source);

DatasetInfo describe_dataset(const DatasetSource& source, const Dataset& train,
                             const Dataset& test);

/// Runs one experiment end to end: dataset, training per the schedule, report.
/// When output_dir is set, writes report.json, epochs.csv, the final
/// checkpoint, and any flag-gated periodic artifacts. Bit-reproducible under
/// (config, seed).
TrainReport run_experiment(const ExperimentConfig& config);

}  // namespace softtarget
