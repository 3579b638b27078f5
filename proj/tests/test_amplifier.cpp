#include <doctest.h>

#include <cmath>

#include "hoig/amplifier.hpp"
#include "hoig/errors.hpp"
#include "oracles.hpp"

using namespace hoig;
using oracle::Matrix;

TEST_SUITE("amplifier") {

TEST_CASE("structural affinity of one-hot memberships") {
    Matrix u = Matrix::from_rows({{1, 0}, {1, 0}, {0, 1}});
    Matrix a = amp::structural_affinity(u);
    CHECK(a(0, 1) == 1.0);  // co-clustered
    CHECK(a(0, 2) == 0.0);  // cross-cluster
}

TEST_CASE("structural affinity of uniform memberships is 1/K") {
    Matrix u(5, 4, 0.25);
    Matrix a = amp::structural_affinity(u);
    for (double v : a.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("structural affinity hand case") {
    Matrix u = Matrix::from_rows({{0.9, 0.1}, {0.8, 0.2}, {0.1, 0.9}});
    Matrix a = amp::structural_affinity(u);
    CHECK(a(0, 1) == doctest::Approx(0.74).epsilon(1e-12));
    CHECK(a(0, 2) == doctest::Approx(0.18).epsilon(1e-12));
}

TEST_CASE("feature affinity scales by 1/sqrt(D)") {
    Matrix x = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
    Matrix a = amp::feature_affinity(x);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(a(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    CHECK(a(1, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    CHECK(a(0, 1) == 0.0);
}

TEST_CASE("feature affinity zero row gives a zero row and column") {
    Matrix x = Matrix::from_rows({{1.0, 2.0}, {0.0, 0.0}, {3.0, -1.0}});
    Matrix a = amp::feature_affinity(x);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(a(1, j) == 0.0);
        CHECK(a(j, 1) == 0.0);
    }
}

TEST_CASE("feature affinity is symmetric and matches a naive matmul") {
    Rng rng(44);
    Matrix x = oracle::rand_matrix(rng, 8, 4);
    Matrix a = amp::feature_affinity(x);
    Matrix want = oracle::naive_matmul(x, transpose(x));
    for (double& v : want.data()) v /= std::sqrt(4.0);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(std::abs(a(i, j) - a(j, i)) < 1e-9);
            CHECK(std::abs(a(i, j) - want(i, j)) < 1e-9);
        }
}

TEST_CASE("fuse of constant rows is uniform") {
    Matrix ac(3, 3, 0.4);
    Matrix af(3, 3, -1.7);
    Matrix fused = amp::fuse(ac, af, 0.6);
    for (double v : fused.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("fuse with beta2 = 1 is the row softmax of the structural part") {
    Rng rng(9);
    Matrix ac = oracle::rand_matrix(rng, 4, 4);
    Matrix af = oracle::rand_matrix(rng, 4, 4);
    Matrix fused = amp::fuse(ac, af, 1.0);
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<double> row(ac.row(i).begin(), ac.row(i).end());
        std::vector<double> want = oracle::naive_softmax(row);
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(fused(i, j) == doctest::Approx(want[j]).epsilon(1e-12));
    }
}

TEST_CASE("fuse closed-form 2x2 case") {
    Matrix pre = Matrix::from_rows({{0.0, std::log(3.0)}, {0.0, 0.0}});
    Matrix zero(2, 2, 0.0);
    Matrix fused = amp::fuse(pre, zero, 1.0);
    CHECK(fused(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(fused(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(fused(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fused(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fuse rejects beta2 outside the unit interval") {
    Matrix a(2, 2, 0.0);
    CHECK_THROWS_AS(amp::fuse(a, a, -0.01), ConfigError);
    CHECK_THROWS_AS(amp::fuse(a, a, 1.01), ConfigError);
}

TEST_CASE("fused rows always sum to one") {
    Rng rng(55);
    for (int rep = 0; rep < 25; ++rep) {
        std::size_t n = 2 + rng.index(10);
        Matrix ac = oracle::rand_matrix(rng, n, n, -3.0, 3.0);
        Matrix af = oracle::rand_matrix(rng, n, n, -3.0, 3.0);
        Matrix fused = amp::fuse(ac, af, rng.uniform());
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) sum += fused(i, j);
            CHECK(std::abs(sum - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("amplify with identity affinity and zero weights scales uniformly") {
    Rng rng(66);
    std::size_t n = 5;
    Matrix x = oracle::rand_matrix(rng, n, 3);
    Matrix eye(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) eye(i, i) = 1.0;
    amp::AttentionWeights w{std::vector<double>(3, 0.0)};
    amp::AmplifyResult res = amp::amplify(eye, x, w);
    const double gain = 1.0 + 1.0 / static_cast<double>(n);
    for (double a : res.attention) CHECK(a == doctest::Approx(1.0 / n).epsilon(1e-12));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < 3; ++t)
            CHECK(res.amplified(i, t) == doctest::Approx(gain * x(i, t)).epsilon(1e-12));
}

TEST_CASE("amplify single node doubles the features") {
    Matrix x(1, 2);
    x(0, 0) = 1.5;
    x(0, 1) = -4.0;
    Matrix a(1, 1, 1.0);  // softmax over one entry
    amp::AttentionWeights w{std::vector<double>{0.3, 0.7}};
    amp::AmplifyResult res = amp::amplify(a, x, w);
    CHECK(res.attention[0] == 1.0);
    CHECK(res.amplified(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(res.amplified(0, 1) == doctest::Approx(-8.0).epsilon(1e-12));
}

TEST_CASE("amplify matches the straight-line oracle on seeded instances") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(derive_seed(2024, seed));
        std::size_t n = 2 + rng.index(9), d = 1 + rng.index(6);
        Matrix raw = oracle::rand_matrix(rng, n, n, -2.0, 2.0);
        Matrix a = amp::fuse(raw, raw, 1.0);  // row-stochastic input
        Matrix x = oracle::rand_matrix(rng, n, d, -3.0, 3.0);
        std::vector<double> w(d);
        for (double& v : w) v = rng.normal();

        amp::AmplifyResult got = amp::amplify(a, x, amp::AttentionWeights{w});
        oracle::NaiveAmplify want = oracle::naive_amplify(a, x, w);

        double alpha_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(got.attention[i] >= 0.0);
            alpha_sum += got.attention[i];
            CHECK(std::abs(got.attention[i] - want.attention[i]) < 1e-9);
            for (std::size_t t = 0; t < d; ++t)
                CHECK(std::abs(got.amplified(i, t) - want.amplified(i, t)) < 1e-9);
        }
        CHECK(std::abs(alpha_sum - 1.0) < 1e-6);
    }
}

TEST_CASE("softmax is invariant to constant shifts") {
    Rng rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x(6);
        for (double& v : x) v = rng.normal() * 3.0;
        std::vector<double> shifted = x;
        double c = rng.normal() * 10.0;
        for (double& v : shifted) v += c;
        std::vector<double> a = softmax(x), b = softmax(shifted);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
    }
}

TEST_CASE("amplify rejects mismatched shapes") {
    Matrix a(3, 3, 0.2);
    Matrix x(4, 2, 0.0);
    amp::AttentionWeights w{std::vector<double>(2, 0.0)};
    CHECK_THROWS_AS(amp::amplify(a, x, w), ShapeError);
    Matrix x3(3, 2, 0.0);
    amp::AttentionWeights bad{std::vector<double>(5, 0.0)};
    CHECK_THROWS_AS(amp::amplify(a, x3, bad), ShapeError);
}

}  // TEST_SUITE
