#include <doctest.h>

#include <cmath>
#include <fstream>

#include "softtarget/analysis.hpp"
#include "softtarget/dataset.hpp"
#include "softtarget/errors.hpp"
#include "tmpdir.hpp"

using namespace softtarget;
using softtarget::testing::TmpDir;

namespace {

// Brute-force sample covariance of two prediction columns, written as the
// plainest possible double loop so it stays independent of the library path.
double brute_covariance(const Matrix& p, std::size_t a, std::size_t b) {
    const std::size_t n = p.rows();
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += p(i, a);
        mean_b += p(i, b);
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (p(i, a) - mean_a) * (p(i, b) - mean_b);
    return acc / static_cast<double>(n - 1);
}

Matrix random_probs(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix z(rows, cols);
    for (double& v : z.data()) v = rng.uniform(-2.0, 2.0);
    return row_softmax(z);
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("raw covariance matches the brute-force oracle on a 20-sample fixture") {
    Rng rng(101);
    const Matrix p = random_probs(20, 5, rng);
    const CoLabelMatrix cov = colabel_covariance(p);
    for (std::size_t a = 0; a < 5; ++a) {
        for (std::size_t b = 0; b < 5; ++b) {
            if (a == b) {
                CHECK(cov.raw(a, a) == 0.0);
            } else {
                CHECK(std::abs(cov.raw(a, b) - brute_covariance(p, a, b)) < 1e-12);
            }
        }
    }
}

TEST_CASE("scaling lands on [0,1] with both endpoints attained") {
    Rng rng(102);
    const Matrix p = random_probs(30, 4, rng);
    const CoLabelMatrix cov = colabel_covariance(p);
    REQUIRE(!cov.degenerate);
    bool saw_zero = false, saw_one = false;
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            if (a == b) {
                CHECK(cov.scaled(a, a) == 0.0);
                continue;
            }
            CHECK(cov.scaled(a, b) >= 0.0);
            CHECK(cov.scaled(a, b) <= 1.0);
            if (cov.scaled(a, b) == 0.0) saw_zero = true;
            if (cov.scaled(a, b) == 1.0) saw_one = true;
        }
    }
    CHECK(saw_zero);
    CHECK(saw_one);
}

TEST_CASE("a perfectly co-moving pair takes the maximum") {
    // Columns 0 and 1 rise and fall together; column 2 moves against them.
    Matrix p(8, 3);
    Rng rng(103);
    for (std::size_t i = 0; i < 8; ++i) {
        const double shared = rng.uniform(0.1, 0.4);
        p(i, 0) = shared;
        p(i, 1) = shared;
        p(i, 2) = 1.0 - 2.0 * shared;
    }
    const CoLabelMatrix cov = colabel_covariance(p);
    CHECK(cov.scaled(0, 1) == 1.0);
    CHECK(max_offdiag_pair(cov) == std::pair<std::size_t, std::size_t>{0, 1});
}

TEST_CASE("identical-up-to-noise columns beat an independent column") {
    Rng rng(104);
    Matrix p(40, 3);
    for (std::size_t i = 0; i < 40; ++i) {
        const double base = rng.uniform(0.2, 0.5);
        double a = base + rng.uniform(-0.01, 0.01);
        double b = base + rng.uniform(-0.01, 0.01);
        double c = rng.uniform(0.2, 0.5);
        const double sum = a + b + c;
        p(i, 0) = a / sum;
        p(i, 1) = b / sum;
        p(i, 2) = c / sum;
    }
    const CoLabelMatrix cov = colabel_covariance(p);
    CHECK(cov.scaled(0, 1) > cov.scaled(0, 2));
}

TEST_CASE("constant predictions are flagged degenerate with all-zero values") {
    Matrix p(10, 4);
    for (double& v : p.data()) v = 0.25;
    const CoLabelMatrix cov = colabel_covariance(p);
    CHECK(cov.degenerate);
    for (double v : cov.scaled.data()) CHECK(v == 0.0);
}

TEST_CASE("row permutation leaves the covariance unchanged") {
    Rng rng(105);
    const Matrix p = random_probs(25, 4, rng);
    Rng shuffle_rng(9);
    const Matrix shuffled = gather_rows(p, random_permutation(25, shuffle_rng));
    const CoLabelMatrix a = colabel_covariance(p);
    const CoLabelMatrix b = colabel_covariance(shuffled);
    CHECK(max_abs_diff(a.raw, b.raw) < 1e-12);
    CHECK(max_abs_diff(a.scaled, b.scaled) < 1e-9);
}

TEST_CASE("output is exactly symmetric") {
    Rng rng(106);
    const CoLabelMatrix cov = colabel_covariance(random_probs(15, 6, rng));
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b) CHECK(cov.scaled(a, b) == cov.scaled(b, a));
}

TEST_CASE("scaling preserves the argmax pair for positively dominated covariances") {
    Rng rng(107);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix p = random_probs(30, 5, rng);
        const CoLabelMatrix cov = colabel_covariance(p);
        if (cov.degenerate) continue;
        std::size_t ra = 0, rb = 1;
        double best = -1e300;
        for (std::size_t a = 0; a < 5; ++a) {
            for (std::size_t b = a + 1; b < 5; ++b) {
                if (cov.raw(a, b) > best) {
                    best = cov.raw(a, b);
                    ra = a;
                    rb = b;
                }
            }
        }
        CHECK(max_offdiag_pair(cov) == std::pair{ra, rb});
        CHECK(cov.scaled(ra, rb) == 1.0);
    }
}

TEST_CASE("fewer than two samples is rejected") {
    CHECK_THROWS_AS(colabel_covariance(Matrix(1, 3)), ValueError);
}

TEST_CASE("binarize keeps only the argmax") {
    const Matrix p = Matrix::from_rows({{0.2, 0.5, 0.3}, {0.6, 0.3, 0.1}});
    const Matrix b = binarize_predictions(p);
    CHECK(bitwise_equal(b, Matrix::from_rows({{0, 1, 0}, {1, 0, 0}})));
}

TEST_CASE("trajectory of one checkpoint equals the direct computation") {
    Rng rng(108);
    const Network net = Network::init(
        {LayerSpec::dense(6, 8), LayerSpec::relu(), LayerSpec::dense(8, 4), LayerSpec::softmax()},
        rng);
    Matrix x(12, 6);
    for (double& v : x.data()) v = rng.uniform(0.0, 1.0);
    const auto traj = covariance_trajectory({net}, x);
    REQUIRE(traj.size() == 1);
    const CoLabelMatrix direct = colabel_covariance(net.infer(x));
    CHECK(bitwise_equal(traj[0].raw, direct.raw));
    CHECK(bitwise_equal(traj[0].scaled, direct.scaled));
}

TEST_CASE("duplicate checkpoints give identical matrices") {
    Rng rng(109);
    const Network net = Network::init({LayerSpec::dense(3, 3), LayerSpec::softmax()}, rng);
    Matrix x(9, 3);
    for (double& v : x.data()) v = rng.uniform(0.0, 1.0);
    const auto traj = covariance_trajectory({net, net}, x);
    REQUIRE(traj.size() == 2);
    CHECK(bitwise_equal(traj[0].scaled, traj[1].scaled));
}

TEST_CASE("csv exports carry the class header and full grid") {
    Rng rng(110);
    const CoLabelMatrix cov = colabel_covariance(random_probs(12, 3, rng));
    TmpDir tmp("colabel");
    write_colabel_csv(cov, {"ant", "bee", "cat"}, tmp.file("wide.csv"));
    write_colabel_long_csv(cov, {"ant", "bee", "cat"}, tmp.file("long.csv"));

    std::ifstream wide(tmp.file("wide.csv"));
    std::string header;
    std::getline(wide, header);
    CHECK(header == "ant,bee,cat");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(wide, line)) ++rows;
    CHECK(rows == 3);

    std::ifstream longf(tmp.file("long.csv"));
    std::getline(longf, header);
    CHECK(header == "class_a,class_b,value");
    rows = 0;
    while (std::getline(longf, line)) ++rows;
    CHECK(rows == 9);
}

}  // TEST_SUITE
