#include <doctest.h>

#include <cmath>

#include "hoig/errors.hpp"
#include "hoig/fcm.hpp"
#include "hoig/hypergraph.hpp"
#include "oracles.hpp"

using namespace hoig;
using oracle::Matrix;

TEST_SUITE("hypergraph") {

TEST_CASE("degree-free build keeps the incidence bit-identical") {
    Rng rng(3);
    Matrix u = oracle::rand_row_stochastic(rng, 6, 3);
    Matrix c = oracle::rand_matrix(rng, 3, 2);
    hypergraph::Hypergraph h = hypergraph::build(u, c, std::nullopt);
    CHECK(h.incidence == u);
    CHECK(h.zeroed_rows.empty());
}

TEST_CASE("cap 2 keeps exactly the top two entries per column") {
    Matrix u = Matrix::from_rows({{0.7, 0.05}, {0.2, 0.15}, {0.06, 0.3}, {0.04, 0.5}});
    Matrix c(2, 1, 0.0);
    hypergraph::Hypergraph h = hypergraph::build(u, c, 2);
    // Column 0 keeps rows 0 and 1; column 1 keeps rows 2 and 3.
    CHECK(h.incidence(2, 0) == 0.0);
    CHECK(h.incidence(3, 0) == 0.0);
    CHECK(h.incidence(0, 1) == 0.0);
    CHECK(h.incidence(1, 1) == 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        double sum = h.incidence(i, 0) + h.incidence(i, 1);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("ties in top-k selection go to the lower node index") {
    Matrix u = Matrix::from_rows({{0.4, 0.6}, {0.3, 0.7}, {0.3, 0.7}, {0.0, 1.0}});
    Matrix c(2, 1, 0.0);
    hypergraph::Hypergraph h = hypergraph::build(u, c, 2);
    Matrix want = Matrix::from_rows({{1.0, 0.0}, {0.3, 0.7}, {0.0, 0.0}, {0.0, 1.0}});
    CHECK(h.incidence == want);
    REQUIRE(h.zeroed_rows.size() == 1);
    CHECK(h.zeroed_rows[0] == 2);
}

TEST_CASE("degree cap below two is rejected") {
    Matrix u(4, 2, 0.5);
    Matrix c(2, 1, 0.0);
    CHECK_THROWS_AS(hypergraph::build(u, c, 1), ConfigError);
    CHECK_NOTHROW(hypergraph::build(u, c, 2));
}

TEST_CASE("build is idempotent under the same cap") {
    Rng rng(17);
    Matrix u = oracle::rand_row_stochastic(rng, 9, 4);
    Matrix c = oracle::rand_matrix(rng, 4, 3);
    hypergraph::Hypergraph once = hypergraph::build(u, c, 3);
    hypergraph::Hypergraph twice = hypergraph::build(once.incidence, c, 3);
    CHECK(twice.incidence == once.incidence);
}

TEST_CASE("uniform membership has zero effective cardinality") {
    std::size_t n = 5;
    Matrix u(n, 1, 1.0 / static_cast<double>(n));
    Matrix c(1, 2, 0.0);
    hypergraph::Hypergraph h = hypergraph::build(u, c, std::nullopt);
    hypergraph::CardinalityHistogram hist = hypergraph::effective_cardinalities(h);
    CHECK(hist.total_hyperedges == 1);
    CHECK(hist.counts.at(0) == 1);  // 1/N exceedance is strict
}

TEST_CASE("one-hot columns count their own nodes") {
    Matrix u = Matrix::from_rows({{1, 0}, {1, 0}, {0, 1}, {1, 0}, {0, 1}});
    Matrix c(2, 1, 0.0);
    hypergraph::Hypergraph h = hypergraph::build(u, c, std::nullopt);
    hypergraph::CardinalityHistogram hist = hypergraph::effective_cardinalities(h);
    CHECK(hist.counts.at(3) == 1);
    CHECK(hist.counts.at(2) == 1);
    CHECK(hist.total_hyperedges == 2);
}

TEST_CASE("capped effective cardinality never exceeds the cap") {
    Rng rng(23);
    Matrix u = oracle::rand_row_stochastic(rng, 20, 6);
    Matrix c = oracle::rand_matrix(rng, 6, 4);
    for (int cap : {2, 3, 5}) {
        hypergraph::Hypergraph h = hypergraph::build(u, c, cap);
        hypergraph::CardinalityHistogram hist = hypergraph::effective_cardinalities(h);
        for (const auto& [card, cnt] : hist.counts) {
            CHECK(card <= cap);
            CHECK(cnt >= 0);
        }
    }
}

TEST_CASE("converged clustering on correlated clusters is high-order") {
    // Three correlated Gaussian clusters, N = 42, K = 21, degree-free; the
    // histogram is pinned from a seeded run and its mode must sit at >= 3.
    Rng rng(424242);
    Matrix centers = oracle::rand_matrix(rng, 3, 8, -4.0, 4.0);
    Matrix x = oracle::blobs(rng, centers, 14, 0.8);
    fcm::FcmConfig cfg;
    cfg.max_iters = 50;
    cfg.convergence_tol = 1e-9;
    fcm::FcmResult res = fcm::run(x, 21, fcm::RandomMembership{7}, cfg);
    hypergraph::Hypergraph h = hypergraph::build(res.membership, res.centroids, std::nullopt);
    hypergraph::CardinalityHistogram hist = hypergraph::effective_cardinalities(h);

    int modal_card = -1, modal_count = 0;
    int high_order = 0;
    for (const auto& [card, cnt] : hist.counts) {
        if (cnt > modal_count) {
            modal_count = cnt;
            modal_card = card;
        }
        if (card >= 3) high_order += cnt;
    }
    CHECK(modal_card >= 3);
    CHECK(high_order > hist.total_hyperedges / 2);
    CHECK(hist.to_json() ==
          "{\"n_nodes\":42,\"total\":21,\"counts\":{\"5\":10,\"11\":4,\"12\":3,\"14\":4}}");
}

TEST_CASE("aggregate with beta1 extremes") {
    Rng rng(8);
    Matrix x = oracle::rand_matrix(rng, 5, 3);
    Matrix u = oracle::rand_row_stochastic(rng, 5, 2);
    Matrix c = oracle::rand_matrix(rng, 2, 3);
    hypergraph::Hypergraph h = hypergraph::build(u, c, std::nullopt);

    CHECK(hypergraph::aggregate(x, h, 1.0) == x);

    Matrix onehot = Matrix::from_rows({{1, 0}, {0, 1}, {1, 0}, {0, 1}, {1, 0}});
    hypergraph::Hypergraph h1 = hypergraph::build(onehot, c, std::nullopt);
    Matrix agg = hypergraph::aggregate(x, h1, 0.0);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t t = 0; t < 3; ++t)
            CHECK(agg(i, t) == doctest::Approx(c(i % 2 == 0 ? 0 : 1, t)).epsilon(1e-12));
}

TEST_CASE("aggregate hand case") {
    Matrix x = Matrix::from_rows({{0.0}, {2.0}});
    Matrix u(2, 1, 1.0);
    Matrix c(1, 1, 1.0);
    hypergraph::Hypergraph h = hypergraph::build(u, c, std::nullopt);
    Matrix out = hypergraph::aggregate(x, h, 0.5);
    CHECK(out(0, 0) == doctest::Approx(0.5));
    CHECK(out(1, 0) == doctest::Approx(1.5));
}

TEST_CASE("aggregate output stays inside the feature-centroid bounding box") {
    Rng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix x = oracle::rand_matrix(rng, 8, 3, -2.0, 2.0);
        Matrix u = oracle::rand_row_stochastic(rng, 8, 4);
        Matrix c = oracle::fcm_centroids(x, u, 2.0);
        hypergraph::Hypergraph h = hypergraph::build(u, c, std::nullopt);
        double beta1 = rng.uniform();
        Matrix out = hypergraph::aggregate(x, h, beta1);
        for (std::size_t t = 0; t < 3; ++t) {
            double lo = x(0, t), hi = x(0, t);
            for (std::size_t i = 0; i < 8; ++i) {
                lo = std::min(lo, x(i, t));
                hi = std::max(hi, x(i, t));
            }
            for (std::size_t j = 0; j < 4; ++j) {
                lo = std::min(lo, c(j, t));
                hi = std::max(hi, c(j, t));
            }
            for (std::size_t i = 0; i < 8; ++i) {
                CHECK(out(i, t) >= lo - 1e-12);
                CHECK(out(i, t) <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("aggregate rejects beta1 outside the unit interval") {
    Matrix x(2, 1, 0.0);
    Matrix u(2, 1, 1.0);
    Matrix c(1, 1, 0.0);
    hypergraph::Hypergraph h = hypergraph::build(u, c, std::nullopt);
    CHECK_THROWS_AS(hypergraph::aggregate(x, h, -0.1), ConfigError);
    CHECK_THROWS_AS(hypergraph::aggregate(x, h, 1.1), ConfigError);
}

TEST_CASE("histogram json shape") {
    hypergraph::CardinalityHistogram hist;
    hist.n_nodes = 4;
    hist.total_hyperedges = 3;
    hist.counts[2] = 1;
    hist.counts[3] = 2;
    CHECK(hist.to_json() == "{\"n_nodes\":4,\"total\":3,\"counts\":{\"2\":1,\"3\":2}}");
}

}  // TEST_SUITE
