#include "softtarget/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "softtarget/analysis.hpp"
#include "softtarget/config_io.hpp"
#include "softtarget/errors.hpp"
#include "softtarget/loss.hpp"

namespace softtarget {

const char* train_phase_name(TrainPhase phase) {
    switch (phase) {
        case TrainPhase::Vanilla: return "vanilla";
        case TrainPhase::BurnIn: return "burn_in";
        case TrainPhase::SoftTarget: return "soft_target";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (batch_size < 1) throw ValueError("config: batch_size must be >= 1");
    if (epochs < 1) throw ValueError("config: epochs must be >= 1");
    if (arch.hidden_units < 1) throw ValueError("config: hidden_units must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        throw ValueError("config: dropout must lie in [0, 1), got " + std::to_string(dropout));
    }
    if (softtarget) softtarget->with_total_epochs(epochs).validate();
    if (!(optimizer.rho > 0.0 && optimizer.rho < 1.0)) {
        throw ValueError("config: optimizer.rho must lie in (0, 1)");
    }
    if (!(optimizer.eps > 0.0)) throw ValueError("config: optimizer.eps must be positive");
    if (dataset.kind == DatasetSource::Kind::Synth) {
        if (dataset.synth.classes < 2) throw ValueError("config: synth.classes must be >= 2");
        if (dataset.synth.per_class < 1) throw ValueError("config: synth.per_class must be >= 1");
        if (dataset.synth.dim < 1) throw ValueError("config: synth.dim must be >= 1");
    } else {
        if (dataset.idx.train_images.empty() || dataset.idx.train_labels.empty() ||
            dataset.idx.test_images.empty() || dataset.idx.test_labels.empty()) {
            throw ValueError("config: idx dataset requires all four file paths");
        }
    }
}

std::string arch_label(const ArchSpec& arch) {
    return std::to_string(arch.hidden_layers) + "<-" + std::to_string(arch.hidden_units);
}

namespace {

std::string format_p(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", p);
    return buf;
}

}  // namespace

std::string regime_label(const ExperimentConfig& config) {
    const bool soft = config.softtarget.has_value();
    const bool drop = config.dropout > 0.0;
    if (soft && drop) return "softtarget+dropout(" + format_p(config.dropout) + ")";
    if (soft) return "softtarget";
    if (drop) return "dropout(" + format_p(config.dropout) + ")";
    return "vanilla";
}

Summary summarize(const TrainReport& report) {
    if (report.epochs.empty()) throw ValueError("summarize: empty epoch series");
    Summary s;
    s.min_test_loss = report.epochs.front().test_loss;
    s.max_test_accuracy = report.epochs.front().test_accuracy;
    for (const EpochRecord& rec : report.epochs) {
        s.min_test_loss = std::min(s.min_test_loss, rec.test_loss);
        s.max_test_accuracy = std::max(s.max_test_accuracy, rec.test_accuracy);
    }
    s.last_epoch_test_loss = report.epochs.back().test_loss;
    return s;
}

std::pair<Dataset, Dataset> load_dataset(const DatasetSource& source) {
    if (source.kind == DatasetSource::Kind::Idx) {
        const char* env = std::getenv("SOFTTARGET_DATA_DIR");
        auto resolve = [&](const std::string& path) -> std::string {
            if (env == nullptr || path.empty() || std::filesystem::path(path).is_absolute()) {
                return path;
            }
            return (std::filesystem::path(env) / path).string();
        };
        Dataset train = load_idx(resolve(source.idx.train_images),
                                 resolve(source.idx.train_labels), 10);
        Dataset test = load_idx(resolve(source.idx.test_images),
                                resolve(source.idx.test_labels), 10);
        train = head_subset(train, source.idx.train_subset);
        return {std::move(train), std::move(test)};
    }
    const SynthParams& p = source.synth;
    Rng rng(p.data_seed);
    Dataset all = synth_clusters(p.classes, p.per_class, p.dim, p.spread, p.overlap_pairs, rng);
    return split_dataset(all, p.test_fraction, rng);
}

DatasetInfo describe_dataset(const DatasetSource& source, const Dataset& train,
                             const Dataset& test) {
    DatasetInfo info;
    if (source.kind == DatasetSource::Kind::Idx) {
        std::filesystem::path img(source.idx.train_images);
        info.description = "idx:" + img.filename().string() +
                           (source.idx.train_subset
                                ? ":first" + std::to_string(source.idx.train_subset)
                                : std::string());
    } else {
        const SynthParams& p = source.synth;
        info.description = "synth:k=" + std::to_string(p.classes) + ",per_class=" +
                           std::to_string(p.per_class) + ",dim=" + std::to_string(p.dim) +
                           ",spread=" + format_p(p.spread) + ",overlaps=" +
                           std::to_string(p.overlap_pairs.size()) + ",seed=" +
                           std::to_string(p.data_seed);
    }
    info.n_train = train.size();
    info.n_test = test.size();
    info.dim = train.dim();
    info.classes = train.classes();
    return info;
}

namespace {

std::vector<LayerSpec> build_layers(const ArchSpec& arch, double dropout, std::size_t in_dim,
                                    std::size_t classes) {
    std::vector<LayerSpec> layers;
    std::size_t width = in_dim;
    for (std::size_t h = 0; h < arch.hidden_layers; ++h) {
        layers.push_back(LayerSpec::dense(width, arch.hidden_units));
        layers.push_back(LayerSpec::relu());
        if (dropout > 0.0) layers.push_back(LayerSpec::dropout(dropout));
        width = arch.hidden_units;
    }
    layers.push_back(LayerSpec::dense(width, classes));
    layers.push_back(LayerSpec::softmax());
    return layers;
}

Network init_network_for(const ExperimentConfig& config, std::size_t in_dim, std::size_t classes,
                         Rng& init_rng) {
    return Network::init(build_layers(config.arch, config.dropout, in_dim, classes), init_rng);
}

}  // namespace

Trainer::Trainer(const ExperimentConfig& config, Dataset train, Dataset test)
    : config_(config),
      train_(std::move(train)),
      test_(std::move(test)),
      shuffle_rng_(0),
      dropout_rng_(0) {
    config_.validate();
    if (train_.size() == 0 || test_.size() == 0) {
        throw ValueError("Trainer: train and test sets must be non-empty");
    }
    if (train_.dim() != test_.dim() || train_.classes() != test_.classes()) {
        throw ValueError("Trainer: train and test sets disagree on dim or classes");
    }
    // Stream derivation is fixed: master -> init, shuffle, dropout, in that order.
    Rng master(config_.seed);
    Rng init_rng = master.fork();
    shuffle_rng_ = master.fork();
    dropout_rng_ = master.fork();
    net_ = init_network_for(config_, train_.dim(), train_.classes(), init_rng);
    opt_ = AdadeltaState(net_, config_.optimizer);
}

Matrix Trainer::refresh_predictions() const {
    return net_.infer_in_batches(train_.x);
}

EpochRecord Trainer::train_one_epoch(const Matrix& targets, TrainPhase phase) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = train_.size();
    const auto perm = random_permutation(n, shuffle_rng_);

    double loss_sum = 0.0;
    double loss_hard_sum = 0.0;
    for (std::size_t b0 = 0; b0 < n; b0 += config_.batch_size) {
        const std::size_t b1 = std::min(n, b0 + config_.batch_size);
        const std::vector<std::size_t> idx(perm.begin() + b0, perm.begin() + b1);
        const Matrix xb = gather_rows(train_.x, idx);
        const Matrix tb = gather_rows(targets, idx);

        auto [probs, trace] = net_.forward(xb, dropout_rng_);
        LossResult lr = cross_entropy(probs, tb);
        loss_sum += lr.loss * static_cast<double>(idx.size());
        if (&targets != &train_.y) {
            const Matrix yb = gather_rows(train_.y, idx);
            loss_hard_sum += cross_entropy(probs, yb).loss * static_cast<double>(idx.size());
        } else {
            loss_hard_sum += lr.loss * static_cast<double>(idx.size());
        }
        Gradients grads = net_.backward(trace, lr.grad_logits);
        opt_.step(net_, grads);
    }

    ++epochs_done_;
    EpochRecord rec;
    rec.epoch = epochs_done_;
    rec.phase = phase;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.train_loss_hard = loss_hard_sum / static_cast<double>(n);

    const Matrix test_probs = net_.infer_in_batches(test_.x);
    rec.test_loss = cross_entropy(test_probs, test_.y).loss;
    rec.test_accuracy = accuracy(test_probs, test_.y);
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            start)
                      .count();

    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.test_loss)) {
        throw DivergenceError(rec.epoch, "training diverged: non-finite loss at epoch " +
                                             std::to_string(rec.epoch));
    }
    records_.push_back(rec);
    if (on_epoch) on_epoch(rec);
    return rec;
}

TrainReport Trainer::run() {
    records_.clear();

    if (!config_.softtarget) {
        for (std::size_t e = epochs_done_; e < config_.epochs; ++e) {
            train_one_epoch(train_.y, TrainPhase::Vanilla);
        }
    } else {
        const SoftTargetConfig soft_cfg = config_.softtarget->with_total_epochs(config_.epochs);
        std::size_t cursor = 0;  // absolute epoch index at the start of the current phase
        for (const SchedulePhase& phase : build_schedule(soft_cfg)) {
            switch (phase.kind) {
                case SchedulePhase::Kind::BurnIn:
                    for (std::size_t e = cursor; e < cursor + phase.epochs; ++e) {
                        if (e >= epochs_done_) train_one_epoch(train_.y, TrainPhase::BurnIn);
                    }
                    cursor += phase.epochs;
                    break;
                case SchedulePhase::Kind::Snapshot:
                    if (!soft_) {
                        soft_ = SoftTargetState::init(refresh_predictions(), soft_cfg);
                    }
                    break;
                case SchedulePhase::Kind::TimeStep: {
                    if (epochs_done_ < cursor + phase.epochs) {
                        if (soft_->t() < phase.index) {
                            soft_->update(refresh_predictions());
                            blended_targets_ = soft_->blend(train_.y);
                            if (on_time_step) {
                                on_time_step(soft_->t(), soft_->y_hat(), blended_targets_);
                            }
                        } else if (blended_targets_.empty()) {
                            // Resumed mid-step: rebuild the targets from the restored state.
                            blended_targets_ = soft_->blend(train_.y);
                        }
                        for (std::size_t e = cursor; e < cursor + phase.epochs; ++e) {
                            if (e >= epochs_done_) {
                                train_one_epoch(blended_targets_, TrainPhase::SoftTarget);
                            }
                        }
                    }
                    cursor += phase.epochs;
                    break;
                }
            }
        }
    }

    TrainReport report;
    report.arch_label = arch_label(config_.arch);
    report.regime = regime_label(config_);
    report.seed = config_.seed;
    report.dataset = describe_dataset(config_.dataset, train_, test_);
    report.epochs = records_;
    report.summary = summarize(report);
    return report;
}

Checkpoint Trainer::make_checkpoint() const {
    Checkpoint ckpt;
    ckpt.network = net_;
    ckpt.optimizer = opt_;
    ckpt.soft = soft_;
    ckpt.has_rng = true;
    ckpt.shuffle_rng = shuffle_rng_.state();
    ckpt.dropout_rng = dropout_rng_.state();
    ckpt.epochs_completed = epochs_done_;
    return ckpt;
}

void Trainer::restore_checkpoint(const Checkpoint& ckpt) {
    if (!ckpt.optimizer) {
        throw ValueError("Trainer::restore_checkpoint: checkpoint lacks optimizer state");
    }
    if (!ckpt.has_rng) {
        throw ValueError("Trainer::restore_checkpoint: checkpoint lacks rng state");
    }
    net_ = ckpt.network;
    opt_ = *ckpt.optimizer;
    soft_ = ckpt.soft;
    blended_targets_ = Matrix();
    shuffle_rng_ = Rng::from_state(ckpt.shuffle_rng);
    dropout_rng_ = Rng::from_state(ckpt.dropout_rng);
    epochs_done_ = ckpt.epochs_completed;
    records_.clear();
}

TrainReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    auto [train, test] = load_dataset(config.dataset);
    Trainer trainer(config, std::move(train), std::move(test));

    const bool writing = !config.output_dir.empty();
    std::filesystem::path out_dir(config.output_dir);
    if (writing) std::filesystem::create_directories(out_dir);

    if (writing && (config.checkpoint_every > 0 || config.colabel_every > 0)) {
        trainer.on_epoch = [&](const EpochRecord& rec) {
            if (config.checkpoint_every > 0 && rec.epoch % config.checkpoint_every == 0) {
                save_checkpoint(trainer.make_checkpoint(),
                                (out_dir / ("checkpoint_" + std::to_string(rec.epoch) + ".bin"))
                                    .string());
            }
            if (config.colabel_every > 0 && rec.epoch % config.colabel_every == 0) {
                const CoLabelMatrix cov = colabel_covariance(
                    trainer.network().infer_in_batches(trainer.train_data().x));
                const std::string stem = "colabel_" + std::to_string(rec.epoch);
                write_colabel_csv(cov, trainer.train_data().class_names,
                                  (out_dir / (stem + ".csv")).string());
                write_colabel_long_csv(cov, trainer.train_data().class_names,
                                       (out_dir / (stem + "_long.csv")).string());
            }
        };
    }
    if (writing && config.dump_yhat) {
        trainer.on_time_step = [&](std::size_t t, const Matrix& y_hat, const Matrix&) {
            std::ofstream out(out_dir / ("yhat_" + std::to_string(t) + ".csv"));
            if (!out) throw IoError("cannot write yhat CSV");
            char buf[32];
            for (std::size_t r = 0; r < y_hat.rows(); ++r) {
                for (std::size_t c = 0; c < y_hat.cols(); ++c) {
                    if (c) out << ",";
                    std::snprintf(buf, sizeof buf, "%.17g", y_hat(r, c));
                    out << buf;
                }
                out << "\n";
            }
        };
    }

    TrainReport report = trainer.run();
    if (writing) {
        write_report_files(report, config, config.output_dir);
        save_checkpoint(trainer.make_checkpoint(),
                        (out_dir / ("checkpoint_" + std::to_string(trainer.epochs_completed()) +
                                    ".bin"))
                            .string());
    }
    return report;
}

}  // namespace softtarget
