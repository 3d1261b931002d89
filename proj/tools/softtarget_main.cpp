// Command-line experiment runner: train / grid / analyze / compare.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "softtarget/analysis.hpp"
#include "softtarget/checkpoint.hpp"
#include "softtarget/compare.hpp"
#include "softtarget/config_io.hpp"
#include "softtarget/errors.hpp"
#include "softtarget/experiment.hpp"

namespace st = softtarget;

namespace {

// Exit codes: 0 success, 1 unexpected, 2 config/contract, 3 malformed input
// file, 4 training diverged, 5 file-system failure.
constexpr int kExitOk = 0;
constexpr int kExitUnknown = 1;
constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitDiverged = 4;
constexpr int kExitIo = 5;

struct TrainFlags {
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch_size;
    std::optional<std::string> output_dir;
    std::optional<double> dropout;
    std::optional<std::size_t> hidden_layers;
    std::optional<std::size_t> hidden_units;
    bool softtarget_on = false;
    bool softtarget_off = false;
    std::optional<double> beta, gamma;
    std::optional<std::size_t> burn_in, epochs_per_step;
    std::optional<double> rho, eps;
    std::optional<std::string> images, labels, test_images, test_labels;
    std::optional<std::size_t> train_subset;
    bool synth = false;
    std::optional<std::size_t> classes, per_class, dim;
    std::optional<double> spread, test_fraction;
    std::optional<std::uint64_t> data_seed;
    std::optional<std::size_t> checkpoint_every, colabel_every;
    bool dump_yhat = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file");
    cmd->add_option("--preset", f.preset, "built-in config: mnist-desk or mnist-full");
    cmd->add_option("--seed", f.seed, "rng seed");
    cmd->add_option("--epochs", f.epochs, "total epoch budget n");
    cmd->add_option("--batch-size", f.batch_size);
    cmd->add_option("--output-dir", f.output_dir, "where report.json/epochs.csv/checkpoints go");
    cmd->add_option("--dropout", f.dropout, "dropout rate, 0 disables");
    cmd->add_option("--hidden-layers", f.hidden_layers);
    cmd->add_option("--hidden-units", f.hidden_units);
    cmd->add_flag("--softtarget", f.softtarget_on, "enable SoftTarget regularization");
    cmd->add_flag("--no-softtarget", f.softtarget_off, "disable SoftTarget regularization");
    cmd->add_option("--beta", f.beta, "moving-average decay");
    cmd->add_option("--gamma", f.gamma, "blend weight of the moving average");
    cmd->add_option("--burn-in", f.burn_in, "epochs on hard labels before seeding the average");
    cmd->add_option("--epochs-per-step", f.epochs_per_step, "epochs per blended-target matrix");
    cmd->add_option("--rho", f.rho, "optimizer decay");
    cmd->add_option("--eps", f.eps, "optimizer conditioning constant");
    cmd->add_option("--images", f.images, "IDX training images");
    cmd->add_option("--labels", f.labels, "IDX training labels");
    cmd->add_option("--test-images", f.test_images);
    cmd->add_option("--test-labels", f.test_labels);
    cmd->add_option("--train-subset", f.train_subset, "keep first N training samples, 0 = all");
    cmd->add_flag("--synth", f.synth, "use the synthetic cluster dataset");
    cmd->add_option("--classes", f.classes);
    cmd->add_option("--per-class", f.per_class);
    cmd->add_option("--dim", f.dim);
    cmd->add_option("--spread", f.spread);
    cmd->add_option("--test-fraction", f.test_fraction);
    cmd->add_option("--data-seed", f.data_seed);
    cmd->add_option("--checkpoint-every", f.checkpoint_every);
    cmd->add_option("--colabel-every", f.colabel_every);
    cmd->add_flag("--dump-yhat", f.dump_yhat, "CSV of the label average per time-step");
}

st::ExperimentConfig resolve_config(const TrainFlags& f) {
    st::ExperimentConfig config;
    if (!f.preset.empty() && !f.config_path.empty()) {
        throw st::ValueError("pass either --config or --preset, not both");
    }
    if (!f.preset.empty()) {
        config = st::preset_config(f.preset);
    } else if (!f.config_path.empty()) {
        config = st::load_config(f.config_path);
    }

    if (f.seed) config.seed = *f.seed;
    if (f.epochs) config.epochs = *f.epochs;
    if (f.batch_size) config.batch_size = *f.batch_size;
    if (f.output_dir) config.output_dir = *f.output_dir;
    if (f.dropout) config.dropout = *f.dropout;
    if (f.hidden_layers) config.arch.hidden_layers = *f.hidden_layers;
    if (f.hidden_units) config.arch.hidden_units = *f.hidden_units;
    if (f.softtarget_on && f.softtarget_off) {
        throw st::ValueError("--softtarget and --no-softtarget conflict");
    }
    if (f.softtarget_on && !config.softtarget) config.softtarget = st::SoftTargetParams{};
    if (f.softtarget_off) config.softtarget.reset();
    if (f.beta || f.gamma || f.burn_in || f.epochs_per_step) {
        if (!config.softtarget) config.softtarget = st::SoftTargetParams{};
        if (f.beta) config.softtarget->beta = *f.beta;
        if (f.gamma) config.softtarget->gamma = *f.gamma;
        if (f.burn_in) config.softtarget->burn_in = *f.burn_in;
        if (f.epochs_per_step) config.softtarget->epochs_per_step = *f.epochs_per_step;
    }
    if (f.rho) config.optimizer.rho = *f.rho;
    if (f.eps) config.optimizer.eps = *f.eps;
    if (f.synth) config.dataset.kind = st::DatasetSource::Kind::Synth;
    if (f.images || f.labels || f.test_images || f.test_labels) {
        config.dataset.kind = st::DatasetSource::Kind::Idx;
        if (f.images) config.dataset.idx.train_images = *f.images;
        if (f.labels) config.dataset.idx.train_labels = *f.labels;
        if (f.test_images) config.dataset.idx.test_images = *f.test_images;
        if (f.test_labels) config.dataset.idx.test_labels = *f.test_labels;
    }
    if (f.train_subset) config.dataset.idx.train_subset = *f.train_subset;
    if (f.classes) config.dataset.synth.classes = *f.classes;
    if (f.per_class) config.dataset.synth.per_class = *f.per_class;
    if (f.dim) config.dataset.synth.dim = *f.dim;
    if (f.spread) config.dataset.synth.spread = *f.spread;
    if (f.test_fraction) config.dataset.synth.test_fraction = *f.test_fraction;
    if (f.data_seed) config.dataset.synth.data_seed = *f.data_seed;
    if (f.checkpoint_every) config.checkpoint_every = *f.checkpoint_every;
    if (f.colabel_every) config.colabel_every = *f.colabel_every;
    if (f.dump_yhat) config.dump_yhat = true;
    return config;
}

int run_train(const TrainFlags& flags, bool quiet) {
    st::ExperimentConfig config = resolve_config(flags);
    config.validate();

    auto [train, test] = st::load_dataset(config.dataset);
    if (!quiet) {
        std::printf("dataset: %zu train / %zu test samples, %zu features, %zu classes\n",
                    train.size(), test.size(), train.dim(), train.classes());
        std::printf("arch %s, regime %s, %zu epochs, batch %zu, seed %llu\n",
                    st::arch_label(config.arch).c_str(), st::regime_label(config).c_str(),
                    config.epochs, config.batch_size,
                    static_cast<unsigned long long>(config.seed));
    }

    st::Trainer trainer(config, std::move(train), std::move(test));
    const std::filesystem::path out_dir(config.output_dir);
    if (!config.output_dir.empty()) std::filesystem::create_directories(out_dir);

    trainer.on_epoch = [&](const st::EpochRecord& rec) {
        if (!quiet) {
            std::printf("epoch %4zu [%-11s] train %.4f | hard %.4f | test %.4f | acc %.4f (%.0f ms)\n",
                        rec.epoch, st::train_phase_name(rec.phase), rec.train_loss,
                        rec.train_loss_hard, rec.test_loss, rec.test_accuracy, rec.wall_ms);
            std::fflush(stdout);
        }
        if (!config.output_dir.empty()) {
            if (config.checkpoint_every > 0 && rec.epoch % config.checkpoint_every == 0) {
                st::save_checkpoint(
                    trainer.make_checkpoint(),
                    (out_dir / ("checkpoint_" + std::to_string(rec.epoch) + ".bin")).string());
            }
            if (config.colabel_every > 0 && rec.epoch % config.colabel_every == 0) {
                const st::CoLabelMatrix cov = st::colabel_covariance(
                    trainer.network().infer_in_batches(trainer.train_data().x));
                const std::string stem = "colabel_" + std::to_string(rec.epoch);
                st::write_colabel_csv(cov, trainer.train_data().class_names,
                                      (out_dir / (stem + ".csv")).string());
                st::write_colabel_long_csv(cov, trainer.train_data().class_names,
                                           (out_dir / (stem + "_long.csv")).string());
            }
        }
    };
    if (!config.output_dir.empty() && config.dump_yhat) {
        trainer.on_time_step = [&](std::size_t t, const st::Matrix& y_hat, const st::Matrix&) {
            std::ofstream out(out_dir / ("yhat_" + std::to_string(t) + ".csv"));
            if (!out) throw st::IoError("cannot write yhat CSV");
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

    const st::TrainReport report = trainer.run();
    if (!config.output_dir.empty()) {
        st::write_report_files(report, config, config.output_dir);
        st::save_checkpoint(
            trainer.make_checkpoint(),
            (out_dir / ("checkpoint_" + std::to_string(trainer.epochs_completed()) + ".bin"))
                .string());
    }
    std::printf("summary: min loss %.6f | last-epoch loss %.6f | max accuracy %.6f\n",
                report.summary.min_test_loss, report.summary.last_epoch_test_loss,
                report.summary.max_test_accuracy);
    return kExitOk;
}

int run_grid(const std::string& config_path, const std::string& output_dir, std::size_t jobs,
             bool quiet) {
    auto [base, grid] = st::load_grid_config(config_path);
    if (!output_dir.empty()) base.output_dir = output_dir;
    if (base.output_dir.empty()) {
        throw st::ValueError("grid: an output directory is required (config output_dir or --output-dir)");
    }
    const std::filesystem::path root(base.output_dir);
    std::filesystem::create_directories(root);

    struct Cell {
        st::ExperimentConfig config;
        std::string dir;
    };
    std::vector<Cell> cells;
    for (const auto& [layers, units] : grid.architectures) {
        for (const std::string& regime : grid.regimes) {
            for (const std::uint64_t seed : grid.seeds) {
                st::ExperimentConfig c = st::apply_regime(base, regime);
                c.arch = st::ArchSpec{layers, units};
                c.seed = seed;
                std::string name = std::to_string(layers) + "x" + std::to_string(units) + "_" +
                                   regime + "_s" + std::to_string(seed);
                for (char& ch : name) {
                    if (ch == ':' || ch == '+' || ch == '(' || ch == ')') ch = '-';
                }
                c.output_dir = (root / name).string();
                c.validate();
                cells.push_back({std::move(c), name});
            }
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex print_mutex;
    std::atomic<bool> failed{false};
    std::string first_error;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size() || failed.load()) return;
            try {
                const st::TrainReport report = st::run_experiment(cells[i].config);
                std::lock_guard<std::mutex> lock(print_mutex);
                if (!quiet) {
                    std::printf("[%zu/%zu] %s: min %.4f | last %.4f | acc %.4f\n", i + 1,
                                cells.size(), cells[i].dir.c_str(), report.summary.min_test_loss,
                                report.summary.last_epoch_test_loss,
                                report.summary.max_test_accuracy);
                    std::fflush(stdout);
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(print_mutex);
                if (!failed.exchange(true)) first_error = e.what();
                return;
            }
        }
    };
    jobs = std::max<std::size_t>(1, jobs);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, cells.size()); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw st::Error("grid cell failed: " + first_error);

    // Manifest of cell directories so `compare` can pick the reports up.
    std::ofstream manifest(root / "grid_manifest.txt");
    for (const Cell& cell : cells) manifest << cell.dir << "/report.json\n";
    std::printf("grid done: %zu cells under %s\n", cells.size(), base.output_dir.c_str());
    return kExitOk;
}

int run_analyze(const TrainFlags& flags, const std::vector<std::string>& checkpoints,
                const std::string& out_dir_str, bool binarize, bool use_test) {
    if (checkpoints.empty()) throw st::ValueError("analyze: no checkpoint files given");
    st::ExperimentConfig config = resolve_config(flags);
    auto [train, test] = st::load_dataset(config.dataset);
    const st::Dataset& data = use_test ? test : train;

    const std::filesystem::path out_dir(out_dir_str.empty() ? "." : out_dir_str);
    std::filesystem::create_directories(out_dir);

    for (const std::string& path : checkpoints) {
        const st::Checkpoint ckpt = st::load_checkpoint(path);
        st::Matrix preds = ckpt.network.infer_in_batches(data.x);
        if (binarize) preds = st::binarize_predictions(preds);
        const st::CoLabelMatrix cov = st::colabel_covariance(preds);
        const std::string stem = "colabel_" + std::to_string(ckpt.epochs_completed);
        st::write_colabel_csv(cov, data.class_names, (out_dir / (stem + ".csv")).string());
        st::write_colabel_long_csv(cov, data.class_names,
                                   (out_dir / (stem + "_long.csv")).string());
        const auto [a, b] = st::max_offdiag_pair(cov);
        std::printf("%s (epoch %llu): strongest co-label pair (%zu, %zu)%s\n", path.c_str(),
                    static_cast<unsigned long long>(ckpt.epochs_completed), a, b,
                    cov.degenerate ? " [degenerate]" : "");
    }
    return kExitOk;
}

int run_compare(const std::vector<std::string>& report_paths, const std::string& out_csv,
                const std::string& out_md) {
    std::vector<st::TrainReport> reports;
    reports.reserve(report_paths.size());
    for (const std::string& path : report_paths) reports.push_back(st::load_report(path));
    const st::ComparisonTable table = st::compare_runs(reports);
    const std::string md = st::comparison_to_markdown(table);
    std::fputs(md.c_str(), stdout);
    if (!out_md.empty()) {
        std::ofstream out(out_md);
        if (!out) throw st::IoError("cannot write " + out_md);
        out << md;
    }
    if (!out_csv.empty()) {
        std::ofstream out(out_csv);
        if (!out) throw st::IoError("cannot write " + out_csv);
        out << st::comparison_to_csv(table);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SoftTarget regularization trainer and over-fitting diagnostics"};
    app.require_subcommand(1);

    TrainFlags train_flags;
    bool quiet = false;
    CLI::App* train_cmd = app.add_subcommand("train", "run one training experiment");
    add_train_flags(train_cmd, train_flags);
    train_cmd->add_flag("--quiet", quiet, "suppress per-epoch progress");

    std::string grid_config, grid_out;
    std::size_t grid_jobs = 1;
    bool grid_quiet = false;
    CLI::App* grid_cmd = app.add_subcommand("grid", "run an architecture x regime x seed grid");
    grid_cmd->add_option("--config", grid_config, "JSON config with a \"grid\" section")
        ->required();
    grid_cmd->add_option("--output-dir", grid_out, "root directory for cell outputs");
    grid_cmd->add_option("--jobs", grid_jobs, "parallel worker threads (cells are independent)");
    grid_cmd->add_flag("--quiet", grid_quiet);

    TrainFlags analyze_flags;
    std::vector<std::string> analyze_ckpts;
    std::string analyze_out;
    bool analyze_binarize = false, analyze_test = false;
    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "co-label covariance of saved checkpoints");
    add_train_flags(analyze_cmd, analyze_flags);
    analyze_cmd->add_option("--checkpoints", analyze_ckpts, "checkpoint .bin files")
        ->required()
        ->expected(-1);
    analyze_cmd->add_option("--out", analyze_out, "output directory for colabel CSVs");
    analyze_cmd->add_flag("--binarize", analyze_binarize,
                          "use argmax one-hots instead of soft probabilities");
    analyze_cmd->add_flag("--use-test", analyze_test, "predict the test split instead of train");

    std::vector<std::string> compare_reports;
    std::string compare_csv, compare_md;
    CLI::App* compare_cmd = app.add_subcommand("compare", "summary table across report.json files");
    compare_cmd->add_option("--reports", compare_reports, "report.json files")
        ->required()
        ->expected(-1);
    compare_cmd->add_option("--out-csv", compare_csv);
    compare_cmd->add_option("--out-md", compare_md);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return run_train(train_flags, quiet);
        if (grid_cmd->parsed()) return run_grid(grid_config, grid_out, grid_jobs, grid_quiet);
        if (analyze_cmd->parsed()) {
            return run_analyze(analyze_flags, analyze_ckpts, analyze_out, analyze_binarize,
                               analyze_test);
        }
        if (compare_cmd->parsed()) return run_compare(compare_reports, compare_csv, compare_md);
    } catch (const st::DivergenceError& e) {
        std::fprintf(stderr, "error (diverged): %s\n", e.what());
        return kExitDiverged;
    } catch (const st::ParseError& e) {
        std::fprintf(stderr, "error (bad input file): %s\n", e.what());
        return kExitParse;
    } catch (const st::IoError& e) {
        std::fprintf(stderr, "error (io): %s\n", e.what());
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error (io): %s\n", e.what());
        return kExitIo;
    } catch (const st::ShapeError& e) {
        std::fprintf(stderr, "error (contract): %s\n", e.what());
        return kExitConfig;
    } catch (const st::ValueError& e) {
        std::fprintf(stderr, "error (config): %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUnknown;
    }
    return kExitUnknown;
}
