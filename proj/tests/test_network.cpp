#include <doctest.h>

#include <cmath>
#include <vector>

#include "softtarget/errors.hpp"
#include "softtarget/loss.hpp"
#include "softtarget/network.hpp"

using namespace softtarget;

namespace {

// Straight-line scalar evaluation of Dense -> ReLU -> Dense -> Softmax, kept
// deliberately independent of the Matrix/Network code paths.
std::vector<double> hand_eval(const std::vector<double>& x, const Network& net) {
    const Matrix& w0 = net.weight(0);
    const Matrix& b0 = net.bias(0);
    std::vector<double> h(w0.cols(), 0.0);
    for (std::size_t j = 0; j < w0.cols(); ++j) {
        double acc = b0(0, j);
        for (std::size_t i = 0; i < w0.rows(); ++i) acc += x[i] * w0(i, j);
        h[j] = acc > 0.0 ? acc : 0.0;
    }
    const Matrix& w1 = net.weight(1);
    const Matrix& b1 = net.bias(1);
    std::vector<double> z(w1.cols(), 0.0);
    for (std::size_t j = 0; j < w1.cols(); ++j) {
        double acc = b1(0, j);
        for (std::size_t i = 0; i < w1.rows(); ++i) acc += h[i] * w1(i, j);
        z[j] = acc;
    }
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
}

Matrix random_probs(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix z(rows, cols);
    for (double& v : z.data()) v = rng.uniform(-2.0, 2.0);
    return row_softmax(z);
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("init is deterministic and biases are zero") {
    const std::vector<LayerSpec> specs{LayerSpec::dense(2, 3), LayerSpec::softmax()};
    Rng r1(4), r2(4);
    const Network a = Network::init(specs, r1);
    const Network b = Network::init(specs, r2);
    CHECK(bitwise_equal(a.weight(0), b.weight(0)));
    for (double v : a.bias(0).data()) CHECK(v == 0.0);
}

TEST_CASE("init draws inside the Glorot-uniform bounds") {
    Rng rng(10);
    const Network net = Network::init({LayerSpec::dense(30, 50), LayerSpec::softmax()}, rng);
    const double limit = std::sqrt(6.0 / 80.0);
    for (double v : net.weight(0).data()) {
        CHECK(v >= -limit);
        CHECK(v <= limit);
    }
}

TEST_CASE("init sample mean near zero for Dense(100,100)") {
    Rng rng(81);
    const Network net = Network::init({LayerSpec::dense(100, 100), LayerSpec::softmax()}, rng);
    double sum = 0.0;
    for (double v : net.weight(0).data()) sum += v;
    CHECK(std::abs(sum / 10000.0) < 0.01);
}

TEST_CASE("validation rejects bad stacks") {
    Rng rng(1);
    CHECK_THROWS_AS(Network::init({}, rng), ValueError);
    CHECK_THROWS_AS(Network::init({LayerSpec::dense(2, 0), LayerSpec::softmax()}, rng), ValueError);
    CHECK_THROWS_AS(
        Network::init({LayerSpec::dense(2, 3), LayerSpec::dense(4, 2), LayerSpec::softmax()}, rng),
        ValueError);
    CHECK_THROWS_AS(Network::init({LayerSpec::softmax(), LayerSpec::dense(2, 3)}, rng), ValueError);
    CHECK_THROWS_AS(Network::init({LayerSpec::dropout(0.5), LayerSpec::dense(2, 3)}, rng),
                    ValueError);
    CHECK_THROWS_AS(Network::init({LayerSpec::dense(2, 3), LayerSpec::dropout(1.0)}, rng),
                    ValueError);
}

TEST_CASE("single softmax layer on a flat row") {
    Rng rng(1);
    const Network net = Network::init({LayerSpec::softmax()}, rng);
    const Matrix out = net.infer(Matrix::from_rows({{0, 0, 0}}));
    for (std::size_t c = 0; c < 3; ++c) CHECK(out(0, c) == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("dropout p=0 in train mode equals infer mode") {
    Rng rng(12);
    const Network net = Network::init(
        {LayerSpec::dense(4, 6), LayerSpec::relu(), LayerSpec::dropout(0.0),
         LayerSpec::dense(6, 3), LayerSpec::softmax()},
        rng);
    Matrix x(5, 4);
    for (double& v : x.data()) v = rng.uniform(0.0, 1.0);
    Rng fwd_rng(3);
    const auto [train_out, trace] = net.forward(x, fwd_rng);
    CHECK(bitwise_equal(train_out, net.infer(x)));
}

TEST_CASE("train-mode forward without dropout consumes no randomness") {
    Rng rng(12);
    const Network net = Network::init(
        {LayerSpec::dense(3, 4), LayerSpec::relu(), LayerSpec::dense(4, 2), LayerSpec::softmax()},
        rng);
    Matrix x(2, 3);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    Rng fwd_rng(3);
    const auto before = fwd_rng.state();
    (void)net.forward(x, fwd_rng);
    CHECK(fwd_rng.state() == before);
}

TEST_CASE("forward matches the straight-line hand evaluation") {
    Rng rng(2023);
    const Network net = Network::init(
        {LayerSpec::dense(3, 5), LayerSpec::relu(), LayerSpec::dense(5, 4), LayerSpec::softmax()},
        rng);
    const std::vector<double> x{0.3, -1.2, 0.7};
    const Matrix out = net.infer(Matrix(1, 3, std::vector<double>(x)));
    const std::vector<double> expect = hand_eval(x, net);
    for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(out(0, c) - expect[c]) < 1e-12);
}

TEST_CASE("inverted dropout keeps the mean activation scale") {
    Rng rng(5);
    const double p = 0.4;
    const Network net =
        Network::init({LayerSpec::dense(1, 1), LayerSpec::dropout(p)}, rng);
    // 1 weight; feed a constant so the dropout layer sees a fixed activation.
    Matrix x(20000, 1);
    for (double& v : x.data()) v = 1.0;
    Rng fwd_rng(99);
    const auto [train_out, trace] = net.forward(x, fwd_rng);
    const Matrix infer_out = net.infer(x);
    double train_mean = 0.0, infer_mean = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        train_mean += train_out(r, 0);
        infer_mean += infer_out(r, 0);
    }
    train_mean /= static_cast<double>(x.rows());
    infer_mean /= static_cast<double>(x.rows());
    CHECK(std::abs(train_mean - infer_mean) / std::abs(infer_mean) < 0.02);
}

TEST_CASE("infer_in_batches is bit-identical to infer") {
    Rng rng(31);
    const Network net = Network::init(
        {LayerSpec::dense(6, 8), LayerSpec::relu(), LayerSpec::dense(8, 4), LayerSpec::softmax()},
        rng);
    Matrix x(103, 6);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    CHECK(bitwise_equal(net.infer_in_batches(x, 10), net.infer(x)));
}

TEST_CASE("backward of zero grad_out is zero") {
    Rng rng(6);
    const Network net = Network::init(
        {LayerSpec::dense(3, 4), LayerSpec::relu(), LayerSpec::dense(4, 2), LayerSpec::softmax()},
        rng);
    Matrix x(5, 3);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    Rng fwd_rng(1);
    const auto [probs, trace] = net.forward(x, fwd_rng);
    const Gradients grads = net.backward(trace, Matrix(5, 2));
    for (const Matrix& g : grads.weights)
        for (double v : g.data()) CHECK(v == 0.0);
    for (const Matrix& g : grads.biases)
        for (double v : g.data()) CHECK(v == 0.0);
}

TEST_CASE("duplicating rows doubles the parameter gradients") {
    Rng rng(7);
    const Network net = Network::init(
        {LayerSpec::dense(3, 4), LayerSpec::relu(), LayerSpec::dense(4, 2), LayerSpec::softmax()},
        rng);
    Matrix x(4, 3);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    Matrix grad_out(4, 2);
    for (double& v : grad_out.data()) v = rng.uniform(-1.0, 1.0);

    Matrix x2(8, 3);
    Matrix grad_out2(8, 2);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 3; ++c) x2(r, c) = x2(r + 4, c) = x(r, c);
        for (std::size_t c = 0; c < 2; ++c) grad_out2(r, c) = grad_out2(r + 4, c) = grad_out(r, c);
    }
    Rng f1(1), f2(1);
    const auto [p1, t1] = net.forward(x, f1);
    const auto [p2, t2] = net.forward(x2, f2);
    const Gradients g1 = net.backward(t1, grad_out);
    const Gradients g2 = net.backward(t2, grad_out2);
    for (std::size_t d = 0; d < g1.weights.size(); ++d) {
        for (std::size_t i = 0; i < g1.weights[d].size(); ++i) {
            CHECK(g2.weights[d].data()[i] ==
                  doctest::Approx(2.0 * g1.weights[d].data()[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("backward rejects a foreign trace or bad grad shape") {
    Rng rng(8);
    const Network net = Network::init({LayerSpec::dense(3, 2), LayerSpec::softmax()}, rng);
    Matrix x(2, 3);
    Rng fwd_rng(1);
    const auto [probs, trace] = net.forward(x, fwd_rng);
    CHECK_THROWS_AS(net.backward(trace, Matrix(3, 2)), ShapeError);
    CHECK_THROWS_AS(net.backward(ForwardTrace{}, Matrix(2, 2)), ShapeError);
}

TEST_CASE("cross_entropy of a perfect one-hot prediction is zero") {
    const Matrix probs = Matrix::from_rows({{1, 0, 0}});
    const LossResult lr = cross_entropy(probs, probs);
    CHECK(lr.loss == 0.0);
    for (double v : lr.grad_logits.data()) CHECK(v == 0.0);
}

TEST_CASE("cross_entropy of uniform predictions is ln K") {
    Matrix probs(1, 10);
    for (double& v : probs.data()) v = 0.1;
    Matrix target(1, 10);
    target(0, 3) = 1.0;
    const LossResult lr = cross_entropy(probs, target);
    CHECK(std::abs(lr.loss - 2.302585092994046) < 1e-12);
}

TEST_CASE("cross_entropy with soft targets, hand value") {
    const Matrix probs = Matrix::from_rows({{0.5, 0.5}});
    const Matrix target = Matrix::from_rows({{0.85, 0.15}});
    const LossResult lr = cross_entropy(probs, target);
    CHECK(std::abs(lr.loss - 0.6931471805599453) < 1e-12);
    CHECK(lr.grad_logits(0, 0) == doctest::Approx(-0.35).epsilon(1e-15));
    CHECK(lr.grad_logits(0, 1) == doctest::Approx(0.35).epsilon(1e-15));
}

TEST_CASE("cross_entropy is non-negative for valid distributions") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix probs = random_probs(6, 4, rng);
        const Matrix targets = random_probs(6, 4, rng);
        CHECK(cross_entropy(probs, targets).loss >= 0.0);
    }
}

TEST_CASE("cross_entropy shape mismatch") {
    CHECK_THROWS_AS(cross_entropy(Matrix(2, 3), Matrix(2, 4)), ShapeError);
}

TEST_CASE("accuracy counts argmax agreement") {
    const Matrix probs = Matrix::from_rows({{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}, {0.5, 0.4, 0.1}});
    const Matrix y = Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {1, 0, 0}});
    CHECK(accuracy(probs, y) == doctest::Approx(2.0 / 3.0));
}

}  // TEST_SUITE
