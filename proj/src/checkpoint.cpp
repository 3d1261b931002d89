#include "softtarget/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "softtarget/errors.hpp"

namespace softtarget {

namespace {

constexpr char kMagic[8] = {'S', 'O', 'F', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
        if (!out_) throw IoError("cannot write " + path);
    }
    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 4);
    }
    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 8);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void matrix(const Matrix& m) {
        u64(m.rows());
        u64(m.cols());
        for (double v : m.data()) f64(v);
    }
    void close() {
        out_.flush();
        if (!out_) throw IoError("failed writing " + path_);
    }

private:
    std::ofstream out_;
    std::string path_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open " + path);
        buf_.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    void bytes(void* p, std::size_t n) {
        if (pos_ + n > buf_.size()) {
            throw ParseError(ParseError::Kind::Truncated, path_ + ": truncated checkpoint");
        }
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    Matrix matrix() {
        const std::size_t rows = u64();
        const std::size_t cols = u64();
        Matrix m(rows, cols);
        for (double& v : m.data()) v = f64();
        return m;
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::vector<unsigned char> buf_;
    std::size_t pos_ = 0;
};

std::uint8_t kind_code(LayerKind kind) {
    switch (kind) {
        case LayerKind::Dense: return 0;
        case LayerKind::Relu: return 1;
        case LayerKind::Softmax: return 2;
        case LayerKind::Dropout: return 3;
    }
    return 255;
}

LayerKind kind_from_code(std::uint8_t code, const std::string& path) {
    switch (code) {
        case 0: return LayerKind::Dense;
        case 1: return LayerKind::Relu;
        case 2: return LayerKind::Softmax;
        case 3: return LayerKind::Dropout;
    }
    throw ParseError(ParseError::Kind::BadFormat,
                     path + ": unknown layer kind code " + std::to_string(code));
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    Writer w(path);
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u64(ckpt.epochs_completed);

    const auto& layers = ckpt.network.layers();
    w.u32(static_cast<std::uint32_t>(layers.size()));
    for (const LayerSpec& spec : layers) {
        w.u8(kind_code(spec.kind));
        w.u64(spec.in);
        w.u64(spec.out);
        w.f64(spec.p);
    }
    for (std::size_t d = 0; d < ckpt.network.dense_count(); ++d) {
        w.matrix(ckpt.network.weight(d));
        w.matrix(ckpt.network.bias(d));
    }

    w.u8(ckpt.optimizer ? 1 : 0);
    if (ckpt.optimizer) {
        w.f64(ckpt.optimizer->config().rho);
        w.f64(ckpt.optimizer->config().eps);
        w.u32(static_cast<std::uint32_t>(ckpt.optimizer->e_g2().size()));
        for (const Matrix& m : ckpt.optimizer->e_g2()) w.matrix(m);
        for (const Matrix& m : ckpt.optimizer->e_dx2()) w.matrix(m);
    }

    w.u8(ckpt.soft ? 1 : 0);
    if (ckpt.soft) {
        const SoftTargetConfig& cfg = ckpt.soft->config();
        w.f64(cfg.beta);
        w.f64(cfg.gamma);
        w.u64(cfg.burn_in);
        w.u64(cfg.epochs_per_step);
        w.u64(cfg.total_epochs);
        w.u64(ckpt.soft->t());
        w.matrix(ckpt.soft->y_hat());
    }

    w.u8(ckpt.has_rng ? 1 : 0);
    if (ckpt.has_rng) {
        for (std::uint64_t v : ckpt.shuffle_rng) w.u64(v);
        for (std::uint64_t v : ckpt.dropout_rng) w.u64(v);
    }
    w.close();
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader r(path);
    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw ParseError(ParseError::Kind::BadMagic, path + ": not a checkpoint file");
    }
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw ParseError(ParseError::Kind::BadFormat,
                         path + ": unsupported checkpoint version " + std::to_string(version));
    }

    Checkpoint ckpt;
    ckpt.epochs_completed = r.u64();

    const std::uint32_t layer_count = r.u32();
    std::vector<LayerSpec> specs;
    specs.reserve(layer_count);
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        LayerSpec spec;
        spec.kind = kind_from_code(r.u8(), r.path());
        spec.in = r.u64();
        spec.out = r.u64();
        spec.p = r.f64();
        specs.push_back(spec);
    }
    std::vector<Matrix> weights, biases;
    for (const LayerSpec& spec : specs) {
        if (spec.kind != LayerKind::Dense) continue;
        weights.push_back(r.matrix());
        biases.push_back(r.matrix());
    }
    ckpt.network = Network::with_params(std::move(specs), std::move(weights), std::move(biases));

    if (r.u8()) {
        AdadeltaConfig cfg;
        cfg.rho = r.f64();
        cfg.eps = r.f64();
        const std::uint32_t count = r.u32();
        std::vector<Matrix> e_g2, e_dx2;
        for (std::uint32_t i = 0; i < count; ++i) e_g2.push_back(r.matrix());
        for (std::uint32_t i = 0; i < count; ++i) e_dx2.push_back(r.matrix());
        ckpt.optimizer = AdadeltaState::restore(cfg, std::move(e_g2), std::move(e_dx2));
    }

    if (r.u8()) {
        SoftTargetConfig cfg;
        cfg.beta = r.f64();
        cfg.gamma = r.f64();
        cfg.burn_in = r.u64();
        cfg.epochs_per_step = r.u64();
        cfg.total_epochs = r.u64();
        const std::uint64_t t = r.u64();
        Matrix y_hat = r.matrix();
        ckpt.soft = SoftTargetState::restore(std::move(y_hat), t, cfg);
    }

    if (r.u8()) {
        ckpt.has_rng = true;
        for (std::uint64_t& v : ckpt.shuffle_rng) v = r.u64();
        for (std::uint64_t& v : ckpt.dropout_rng) v = r.u64();
    }
    return ckpt;
}

}  // namespace softtarget
