#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hoig/errors.hpp"
#include "hoig/fcm.hpp"
#include "oracles.hpp"

using namespace hoig;
using oracle::Matrix;

namespace {

const Matrix kFourNodes = Matrix::from_rows({{0.0}, {1.0}, {4.0}, {5.0}});

void check_row_stochastic(const Matrix& u, double tol = 1e-6) {
    for (std::size_t i = 0; i < u.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < u.cols(); ++j) {
            CHECK(u(i, j) >= 0.0);
            CHECK(u(i, j) <= 1.0 + 1e-12);
            sum += u(i, j);
        }
        CHECK(std::abs(sum - 1.0) < tol);
    }
}

void check_trace_nonincreasing(const std::vector<double>& trace, double slack = 1e-9) {
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + slack);
}

}  // namespace

TEST_SUITE("fcm") {

TEST_CASE("update_centroids with a single cluster is the column mean") {
    Rng rng(42);
    Matrix x = oracle::rand_matrix(rng, 7, 3);
    Matrix u(7, 1, 1.0);
    Matrix c = fcm::update_centroids(x, u, 2.0);
    auto mean = colwise_mean(x);
    for (std::size_t t = 0; t < 3; ++t) CHECK(c(0, t) == doctest::Approx(mean[t]).epsilon(1e-12));
}

TEST_CASE("update_centroids with one-hot memberships gives per-cluster means") {
    Matrix u = Matrix::from_rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
    Matrix c = fcm::update_centroids(kFourNodes, u, 2.0);
    CHECK(c(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c(1, 0) == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("update_centroids handles an all-zero cluster via the global mean") {
    Matrix u = Matrix::from_rows({{1, 0}, {1, 0}, {1, 0}, {1, 0}});
    Matrix c = fcm::update_centroids(kFourNodes, u, 2.0);
    CHECK(c(1, 0) == doctest::Approx(2.5).epsilon(1e-12));  // mean of X
}

TEST_CASE("update_centroids rejects mismatched shapes") {
    Matrix u(3, 2, 0.5);
    CHECK_THROWS_AS(fcm::update_centroids(kFourNodes, u, 2.0), ShapeError);
}

TEST_CASE("update_membership splits evenly between equidistant centroids") {
    Matrix x = Matrix::from_rows({{0.0, 0.0}});
    Matrix c = Matrix::from_rows({{1.0, 0.0}, {-1.0, 0.0}});
    Matrix u = fcm::update_membership(x, c, 2.0, 1e-8);
    CHECK(u(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(u(0, 1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("update_membership approaches uniform as the fuzzifier grows") {
    Matrix x = Matrix::from_rows({{0.0}, {2.5}, {7.0}});
    Matrix c = Matrix::from_rows({{0.0}, {3.0}, {9.0}});
    Matrix u = fcm::update_membership(x, c, 1e6, 1e-8);
    for (std::size_t i = 0; i < u.rows(); ++i)
        for (std::size_t j = 0; j < u.cols(); ++j)
            CHECK(std::abs(u(i, j) - 1.0 / 3.0) < 1e-3);
}

TEST_CASE("update_membership is nearly one-hot at a centroid") {
    Matrix x = Matrix::from_rows({{0.0}});
    Matrix c = Matrix::from_rows({{0.0}, {1.0}});
    Matrix u = fcm::update_membership(x, c, 2.0, 1e-8);
    CHECK(u(0, 0) > 1.0 - 1e-12);
}

TEST_CASE("update_membership rejects invalid fuzzifiers") {
    Matrix x(2, 1, 0.0);
    Matrix c(2, 1, 1.0);
    CHECK_THROWS_AS(fcm::update_membership(x, c, 1.0, 1e-8), ConfigError);
    CHECK_THROWS_AS(fcm::update_membership(x, c, 0.5, 1e-8), ConfigError);
}

TEST_CASE("objective is zero for exact one-hot placement and one for unit distance") {
    Matrix x = Matrix::from_rows({{0.0}, {4.0}});
    Matrix u = Matrix::from_rows({{1, 0}, {0, 1}});
    Matrix c = Matrix::from_rows({{0.0}, {4.0}});
    CHECK(fcm::objective(x, u, c, 2.0) == 0.0);

    Matrix x1(1, 1, 1.0);
    Matrix u1(1, 1, 1.0);
    Matrix c1(1, 1, 0.0);
    CHECK(fcm::objective(x1, u1, c1, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("four-node instance matches the frozen brute-force fixed point") {
    // Library run at tight convergence.
    fcm::FcmConfig cfg;
    cfg.max_iters = 500;
    cfg.convergence_tol = 1e-10;
    fcm::FcmResult res = fcm::run(kFourNodes, 2, fcm::RandomMembership{7}, cfg);
    std::vector<double> got = {res.centroids(0, 0), res.centroids(1, 0)};
    std::sort(got.begin(), got.end());
    CHECK(std::abs(got[0] - oracle::kFourNodeCentroidLow) < 1e-6);
    CHECK(std::abs(got[1] - oracle::kFourNodeCentroidHigh) < 1e-6);
    CHECK(std::abs(res.objective_trace.back() - oracle::kFourNodeObjective) < 1e-8);

    // Independent oracle run agrees with the frozen values too.
    Rng rng(99);
    oracle::FcmFixedPoint fp =
        oracle::fcm_converge(kFourNodes, oracle::rand_row_stochastic(rng, 4, 2), 2.0, 1e-8);
    std::vector<double> ora = {fp.centroids(0, 0), fp.centroids(1, 0)};
    std::sort(ora.begin(), ora.end());
    CHECK(std::abs(ora[0] - oracle::kFourNodeCentroidLow) < 1e-9);
    CHECK(std::abs(ora[1] - oracle::kFourNodeCentroidHigh) < 1e-9);
    CHECK(std::abs(fp.objective - oracle::kFourNodeObjective) < 1e-10);

    // objective() agrees with the oracle value at the oracle's (U, C).
    CHECK(std::abs(fcm::objective(kFourNodes, fp.membership, fp.centroids, 2.0) -
                   oracle::kFourNodeObjective) < 1e-8);
}

TEST_CASE("run with the default iteration budget still nears the optimum") {
    fcm::FcmConfig cfg;  // m = 2, max_iters = 5
    fcm::FcmResult res = fcm::run(kFourNodes, 2, fcm::RandomMembership{1234}, cfg);
    check_trace_nonincreasing(res.objective_trace);
    CHECK(std::abs(res.objective_trace.back() - oracle::kFourNodeObjective) < 1e-6);
}

TEST_CASE("run with max_iters 0 returns injected centroids and induced membership") {
    Matrix injected = Matrix::from_rows({{0.5}, {4.5}});
    fcm::FcmConfig cfg;
    cfg.max_iters = 0;
    fcm::FcmResult res = fcm::run(kFourNodes, 2, fcm::InjectedCentroids{injected}, cfg);
    CHECK(res.centroids == injected);
    CHECK(res.iterations_run == 0);
    CHECK(res.membership == fcm::update_membership(kFourNodes, injected, 2.0, cfg.epsilon));
}

TEST_CASE("near-1 fuzzifier on separated blobs reproduces K-Means assignments") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(derive_seed(500, seed));
        Matrix centers = Matrix::from_rows({{0.0, 0.0}, {100.0, 100.0}});
        Matrix x = oracle::blobs(rng, centers, 10, 1.0);

        fcm::FcmConfig cfg;
        cfg.fuzzifier = 1.05;
        fcm::FcmResult res = fcm::run(x, 2, fcm::KMeansCentroids{seed, 10}, cfg);
        std::vector<int> hard(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i)
            hard[i] = res.membership(i, 0) > res.membership(i, 1) ? 0 : 1;

        // Oracle: Lloyd to convergence seeded from one point of each blob.
        Matrix init = Matrix::from_rows({{x(0, 0), x(0, 1)}, {x(10, 0), x(10, 1)}});
        std::vector<int> want = oracle::kmeans_converged_assignments(x, init);
        CHECK(oracle::canonical_partition(hard) == oracle::canonical_partition(want));
    }
}

TEST_CASE("objective trace is non-increasing and memberships stay stochastic") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(derive_seed(1000, seed));
        std::size_t n = 8 + rng.index(57), d = 2 + rng.index(15);
        int k = 2 + static_cast<int>(rng.index(7));
        if (static_cast<std::size_t>(k) > n) k = static_cast<int>(n);
        Matrix x = oracle::rand_matrix(rng, n, d, -5.0, 5.0);
        fcm::FcmConfig cfg;  // m = 2, max_iters = 5
        fcm::FcmResult res = fcm::run(x, k, fcm::RandomMembership{seed}, cfg);
        check_trace_nonincreasing(res.objective_trace);
        check_row_stochastic(res.membership);
    }
}

TEST_CASE("identical seeds give bit-identical results") {
    Rng rng(77);
    Matrix x = oracle::rand_matrix(rng, 20, 4);
    fcm::FcmConfig cfg;
    fcm::FcmResult a = fcm::run(x, 4, fcm::RandomMembership{31337}, cfg);
    fcm::FcmResult b = fcm::run(x, 4, fcm::RandomMembership{31337}, cfg);
    CHECK(a.membership == b.membership);
    CHECK(a.centroids == b.centroids);
    CHECK(a.objective_trace == b.objective_trace);

    fcm::FcmResult c = fcm::run(x, 4, fcm::KMeansCentroids{31337, 10}, cfg);
    fcm::FcmResult d = fcm::run(x, 4, fcm::KMeansCentroids{31337, 10}, cfg);
    CHECK(c.membership == d.membership);
    CHECK(c.centroids == d.centroids);
}

TEST_CASE("permuting rows permutes the membership identically") {
    Rng rng(11);
    Matrix x = oracle::rand_matrix(rng, 12, 3);
    Matrix init = oracle::rand_matrix(rng, 3, 3);
    fcm::FcmConfig cfg;
    fcm::FcmResult base = fcm::run(x, 3, fcm::InjectedCentroids{init}, cfg);

    // Reverse the node order.
    Matrix rev(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t t = 0; t < x.cols(); ++t) rev(i, t) = x(x.rows() - 1 - i, t);
    fcm::FcmResult perm = fcm::run(rev, 3, fcm::InjectedCentroids{init}, cfg);

    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(perm.membership(x.rows() - 1 - i, j) ==
                  doctest::Approx(base.membership(i, j)).epsilon(1e-12));
}

TEST_CASE("run validates K and input data") {
    CHECK_THROWS_AS(fcm::run(kFourNodes, 5, fcm::RandomMembership{0}, {}), ConfigError);
    CHECK_THROWS_AS(fcm::run(kFourNodes, 0, fcm::RandomMembership{0}, {}), ConfigError);
    try {
        fcm::run(kFourNodes, 5, fcm::RandomMembership{0}, {});
        CHECK(false);
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("5") != std::string::npos);
        CHECK(msg.find("4") != std::string::npos);
    }

    Matrix bad = kFourNodes;
    bad(2, 0) = std::nan("");
    CHECK_THROWS_AS(fcm::run(bad, 2, fcm::RandomMembership{0}, {}), DataError);

    Matrix wrong_shape(3, 2, 0.0);
    CHECK_THROWS_AS(fcm::run(kFourNodes, 2, fcm::InjectedCentroids{wrong_shape}, {}),
                    ShapeError);
}

TEST_CASE("kmeans separates well-separated blobs exactly") {
    Rng rng(5);
    Matrix centers = Matrix::from_rows({{-50.0, 0.0}, {50.0, 0.0}, {0.0, 80.0}});
    Matrix x = oracle::blobs(rng, centers, 8, 0.5);
    Matrix c = fcm::kmeans(x, 3, 123, 25);
    std::vector<int> assign = fcm::nearest_assignments(x, c);
    std::vector<int> truth(24);
    for (std::size_t i = 0; i < 24; ++i) truth[i] = static_cast<int>(i / 8);
    CHECK(oracle::canonical_partition(assign) == oracle::canonical_partition(truth));
}

}  // TEST_SUITE
