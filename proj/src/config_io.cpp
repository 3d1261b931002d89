#include "softtarget/config_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "softtarget/errors.hpp"

namespace softtarget {

using nlohmann::json;

namespace {

json config_to_json(const ExperimentConfig& c) {
    json j;
    json ds;
    if (c.dataset.kind == DatasetSource::Kind::Idx) {
        ds["kind"] = "idx";
        ds["images"] = c.dataset.idx.train_images;
        ds["labels"] = c.dataset.idx.train_labels;
        ds["test_images"] = c.dataset.idx.test_images;
        ds["test_labels"] = c.dataset.idx.test_labels;
        ds["train_subset"] = c.dataset.idx.train_subset;
    } else {
        ds["kind"] = "synth";
        ds["classes"] = c.dataset.synth.classes;
        ds["per_class"] = c.dataset.synth.per_class;
        ds["dim"] = c.dataset.synth.dim;
        ds["spread"] = c.dataset.synth.spread;
        ds["overlap_pairs"] = c.dataset.synth.overlap_pairs;
        ds["test_fraction"] = c.dataset.synth.test_fraction;
        ds["data_seed"] = c.dataset.synth.data_seed;
    }
    j["dataset"] = ds;
    j["arch"] = {{"hidden_layers", c.arch.hidden_layers}, {"hidden_units", c.arch.hidden_units}};
    j["dropout"] = c.dropout;
    if (c.softtarget) {
        j["softtarget"] = {{"beta", c.softtarget->beta},
                           {"gamma", c.softtarget->gamma},
                           {"burn_in", c.softtarget->burn_in},
                           {"epochs_per_step", c.softtarget->epochs_per_step}};
    } else {
        j["softtarget"] = nullptr;
    }
    j["optimizer"] = {{"rho", c.optimizer.rho}, {"eps", c.optimizer.eps}};
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["checkpoint_every"] = c.checkpoint_every;
    j["colabel_every"] = c.colabel_every;
    j["dump_yhat"] = c.dump_yhat;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("dataset")) {
            const json& ds = j.at("dataset");
            const std::string kind = ds.value("kind", "synth");
            if (kind == "idx") {
                c.dataset.kind = DatasetSource::Kind::Idx;
                c.dataset.idx.train_images = ds.value("images", "");
                c.dataset.idx.train_labels = ds.value("labels", "");
                c.dataset.idx.test_images = ds.value("test_images", "");
                c.dataset.idx.test_labels = ds.value("test_labels", "");
                c.dataset.idx.train_subset = ds.value("train_subset", std::size_t{0});
            } else if (kind == "synth") {
                c.dataset.kind = DatasetSource::Kind::Synth;
                SynthParams& p = c.dataset.synth;
                p.classes = ds.value("classes", p.classes);
                p.per_class = ds.value("per_class", p.per_class);
                p.dim = ds.value("dim", p.dim);
                p.spread = ds.value("spread", p.spread);
                if (ds.contains("overlap_pairs")) {
                    p.overlap_pairs.clear();
                    for (const auto& pair : ds.at("overlap_pairs")) {
                        p.overlap_pairs.emplace_back(pair.at(0).get<std::size_t>(),
                                                     pair.at(1).get<std::size_t>());
                    }
                }
                p.test_fraction = ds.value("test_fraction", p.test_fraction);
                p.data_seed = ds.value("data_seed", p.data_seed);
            } else {
                throw ValueError("config: dataset.kind must be \"idx\" or \"synth\", got \"" +
                                 kind + "\"");
            }
        }
        if (j.contains("arch")) {
            c.arch.hidden_layers = j.at("arch").value("hidden_layers", c.arch.hidden_layers);
            c.arch.hidden_units = j.at("arch").value("hidden_units", c.arch.hidden_units);
        }
        c.dropout = j.value("dropout", c.dropout);
        if (j.contains("softtarget") && !j.at("softtarget").is_null()) {
            const json& st = j.at("softtarget");
            SoftTargetParams p;
            p.beta = st.value("beta", p.beta);
            p.gamma = st.value("gamma", p.gamma);
            p.burn_in = st.value("burn_in", p.burn_in);
            p.epochs_per_step = st.value("epochs_per_step", p.epochs_per_step);
            c.softtarget = p;
        }
        if (j.contains("optimizer")) {
            c.optimizer.rho = j.at("optimizer").value("rho", c.optimizer.rho);
            c.optimizer.eps = j.at("optimizer").value("eps", c.optimizer.eps);
        }
        c.batch_size = j.value("batch_size", c.batch_size);
        c.epochs = j.value("epochs", c.epochs);
        c.seed = j.value("seed", c.seed);
        c.output_dir = j.value("output_dir", c.output_dir);
        c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
        c.colabel_every = j.value("colabel_every", c.colabel_every);
        c.dump_yhat = j.value("dump_yhat", c.dump_yhat);
    } catch (const json::exception& e) {
        throw ParseError(ParseError::Kind::BadFormat, std::string("config: ") + e.what());
    }
    return c;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(ParseError::Kind::BadFormat, path + ": " + e.what());
    }
    return j;
}

const char* phase_from_string(const std::string& s, TrainPhase& out) {
    if (s == "vanilla") out = TrainPhase::Vanilla;
    else if (s == "burn_in") out = TrainPhase::BurnIn;
    else if (s == "soft_target") out = TrainPhase::SoftTarget;
    else return "unknown phase";
    return nullptr;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    return config_from_json(read_json_file(path));
}

void save_config(const ExperimentConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << config_to_json(config).dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path);
}

TrainReport load_report(const std::string& path) {
    const json j = read_json_file(path);
    TrainReport r;
    try {
        r.arch_label = j.at("arch").get<std::string>();
        r.regime = j.at("regime").get<std::string>();
        r.seed = j.value("seed", std::uint64_t{0});
        const json& ds = j.at("dataset");
        r.dataset.description = ds.at("description").get<std::string>();
        r.dataset.n_train = ds.at("n_train").get<std::size_t>();
        r.dataset.n_test = ds.at("n_test").get<std::size_t>();
        r.dataset.dim = ds.at("dim").get<std::size_t>();
        r.dataset.classes = ds.at("classes").get<std::size_t>();
        for (const json& e : j.at("epochs")) {
            EpochRecord rec;
            rec.epoch = e.at("epoch").get<std::size_t>();
            if (const char* err = phase_from_string(e.at("phase").get<std::string>(), rec.phase)) {
                throw ParseError(ParseError::Kind::BadFormat, path + ": " + err);
            }
            rec.train_loss = e.at("train_loss").get<double>();
            rec.train_loss_hard = e.at("train_loss_hard").get<double>();
            rec.test_loss = e.at("test_loss").get<double>();
            rec.test_accuracy = e.at("test_accuracy").get<double>();
            rec.wall_ms = e.value("wall_ms", 0.0);
            r.epochs.push_back(rec);
        }
        const json& s = j.at("summary");
        r.summary.min_test_loss = s.at("min_test_loss").get<double>();
        r.summary.last_epoch_test_loss = s.at("last_epoch_test_loss").get<double>();
        r.summary.max_test_accuracy = s.at("max_test_accuracy").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(ParseError::Kind::BadFormat, path + ": " + e.what());
    }
    return r;
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.dataset.kind = DatasetSource::Kind::Idx;
    c.dataset.idx.train_images = "data/mnist/train-images-idx3-ubyte";
    c.dataset.idx.train_labels = "data/mnist/train-labels-idx1-ubyte";
    c.dataset.idx.test_images = "data/mnist/t10k-images-idx3-ubyte";
    c.dataset.idx.test_labels = "data/mnist/t10k-labels-idx1-ubyte";
    c.arch = ArchSpec{3, 256};
    c.softtarget = SoftTargetParams{0.7, 0.5, 2, 2};
    c.batch_size = 128;
    c.seed = 1;
    if (name == "mnist-desk") {
        c.dataset.idx.train_subset = 10000;
        c.epochs = 30;
    } else if (name == "mnist-full") {
        c.epochs = 100;
    } else {
        throw ValueError("unknown preset \"" + name + "\" (expected mnist-desk or mnist-full)");
    }
    return c;
}

std::pair<ExperimentConfig, GridSpec> load_grid_config(const std::string& path) {
    const json j = read_json_file(path);
    ExperimentConfig base = config_from_json(j);
    GridSpec grid;
    if (!j.contains("grid")) {
        throw ValueError(path + ": grid config requires a \"grid\" section");
    }
    try {
        const json& g = j.at("grid");
        for (const auto& a : g.at("architectures")) {
            grid.architectures.emplace_back(a.at(0).get<std::size_t>(),
                                            a.at(1).get<std::size_t>());
        }
        grid.regimes = g.at("regimes").get<std::vector<std::string>>();
        if (g.contains("seeds")) {
            grid.seeds = g.at("seeds").get<std::vector<std::uint64_t>>();
        } else {
            grid.seeds = {base.seed};
        }
    } catch (const json::exception& e) {
        throw ParseError(ParseError::Kind::BadFormat, path + ": " + e.what());
    }
    if (grid.architectures.empty() || grid.regimes.empty() || grid.seeds.empty()) {
        throw ValueError(path + ": grid section must list architectures, regimes and seeds");
    }
    return {base, grid};
}

ExperimentConfig apply_regime(const ExperimentConfig& base, const std::string& regime) {
    ExperimentConfig c = base;
    auto parse_dropout = [&](const std::string& spec) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos) {
            throw ValueError("regime \"" + regime + "\": dropout needs a rate, e.g. dropout:0.2");
        }
        try {
            return std::stod(spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw ValueError("regime \"" + regime + "\": bad dropout rate");
        }
    };
    if (regime == "vanilla") {
        c.softtarget.reset();
        c.dropout = 0.0;
    } else if (regime.rfind("dropout:", 0) == 0) {
        c.softtarget.reset();
        c.dropout = parse_dropout(regime);
    } else if (regime == "softtarget") {
        if (!c.softtarget) c.softtarget = SoftTargetParams{};
        c.dropout = 0.0;
    } else if (regime.rfind("softtarget+dropout:", 0) == 0) {
        if (!c.softtarget) c.softtarget = SoftTargetParams{};
        c.dropout = parse_dropout(regime.substr(std::string("softtarget+").size()));
    } else {
        throw ValueError("unknown regime \"" + regime +
                         "\" (expected vanilla, dropout:P, softtarget, softtarget+dropout:P)");
    }
    return c;
}

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_epochs_csv(const TrainReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "epoch,phase,train_loss,train_loss_hard,test_loss,test_accuracy\n";
    for (const EpochRecord& rec : report.epochs) {
        out << rec.epoch << "," << train_phase_name(rec.phase) << "," << fmt17(rec.train_loss)
            << "," << fmt17(rec.train_loss_hard) << "," << fmt17(rec.test_loss) << ","
            << fmt17(rec.test_accuracy) << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

void write_report_files(const TrainReport& report, const ExperimentConfig& config,
                        const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);

    json j;
    j["config"] = config_to_json(config);
    j["arch"] = report.arch_label;
    j["regime"] = report.regime;
    j["seed"] = report.seed;
    j["dataset"] = {{"description", report.dataset.description},
                    {"n_train", report.dataset.n_train},
                    {"n_test", report.dataset.n_test},
                    {"dim", report.dataset.dim},
                    {"classes", report.dataset.classes}};
    json epochs = json::array();
    for (const EpochRecord& rec : report.epochs) {
        epochs.push_back({{"epoch", rec.epoch},
                          {"phase", train_phase_name(rec.phase)},
                          {"train_loss", rec.train_loss},
                          {"train_loss_hard", rec.train_loss_hard},
                          {"test_loss", rec.test_loss},
                          {"test_accuracy", rec.test_accuracy},
                          {"wall_ms", rec.wall_ms}});
    }
    j["epochs"] = epochs;
    j["summary"] = {{"min_test_loss", report.summary.min_test_loss},
                    {"last_epoch_test_loss", report.summary.last_epoch_test_loss},
                    {"max_test_accuracy", report.summary.max_test_accuracy}};

    std::ofstream out(base / "report.json");
    if (!out) throw IoError("cannot write report.json under " + dir);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing report.json under " + dir);

    write_epochs_csv(report, (base / "epochs.csv").string());
}

}  // namespace softtarget
