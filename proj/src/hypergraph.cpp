#include "hoig/hypergraph.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "hoig/errors.hpp"

namespace hoig::hypergraph {

void CardinalityHistogram::merge(const CardinalityHistogram& other) {
    for (const auto& [card, cnt] : other.counts) counts[card] += cnt;
    total_hyperedges += other.total_hyperedges;
    n_nodes = std::max(n_nodes, other.n_nodes);
}

std::string CardinalityHistogram::to_json() const {
    std::ostringstream os;
    os << "{\"n_nodes\":" << n_nodes << ",\"total\":" << total_hyperedges << ",\"counts\":{";
    bool first = true;
    for (const auto& [card, cnt] : counts) {
        if (!first) os << ",";
        first = false;
        os << "\"" << card << "\":" << cnt;
    }
    os << "}}";
    return os.str();
}

Hypergraph build(const Matrix& membership, const Matrix& centroids,
                 std::optional<int> degree_cap) {
    if (membership.cols() != centroids.rows()) {
        throw ShapeError("hypergraph::build: centroids expected " +
                         shape_string(membership.cols(), centroids.cols()) + ", got " +
                         shape_string(centroids.rows(), centroids.cols()));
    }
    Hypergraph h{membership, centroids, degree_cap, {}};
    if (!degree_cap) return h;

    const int cap = *degree_cap;
    if (cap < 2) {
        throw ConfigError("hypergraph::build: degree cap must be >= 2, got " +
                          std::to_string(cap));
    }
    const std::size_t n = membership.rows(), k = membership.cols();
    if (static_cast<std::size_t>(cap) >= n) return h;  // cap cannot remove anything

    std::vector<bool> row_touched(n, false);
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < k; ++j) {
        // Top-cap selection per column; equal values keep the lower node index.
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return h.incidence(a, j) > h.incidence(b, j);
        });
        for (std::size_t r = static_cast<std::size_t>(cap); r < n; ++r) {
            std::size_t i = order[r];
            if (h.incidence(i, j) != 0.0) {
                h.incidence(i, j) = 0.0;
                row_touched[i] = true;
            }
        }
    }
    // Renormalize only rows that lost mass; untouched rows stay bit-identical.
    for (std::size_t i = 0; i < n; ++i) {
        if (!row_touched[i]) continue;
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += h.incidence(i, j);
        if (sum == 0.0) {
            h.zeroed_rows.push_back(i);
        } else {
            for (std::size_t j = 0; j < k; ++j) h.incidence(i, j) /= sum;
        }
    }
    return h;
}

CardinalityHistogram effective_cardinalities(const Hypergraph& h) {
    const std::size_t n = h.incidence.rows(), k = h.incidence.cols();
    const double d_eff =
        h.degree_cap ? static_cast<double>(*h.degree_cap) : static_cast<double>(n);
    const double threshold = 1.0 / d_eff;
    CardinalityHistogram hist;
    hist.n_nodes = static_cast<int>(n);
    hist.total_hyperedges = static_cast<int>(k);
    for (std::size_t j = 0; j < k; ++j) {
        int card = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (h.incidence(i, j) > threshold) ++card;
        ++hist.counts[card];
    }
    return hist;
}

Matrix aggregate(const Matrix& x, const Hypergraph& h, double beta1) {
    if (beta1 < 0.0 || beta1 > 1.0) {
        throw ConfigError("hypergraph::aggregate: beta1 must be in [0,1], got " +
                          std::to_string(beta1));
    }
    require_shape("hypergraph::aggregate", "features", h.incidence.rows(), h.centroids.cols(),
                  x.rows(), x.cols());
    if (beta1 == 1.0) return x;  // residual only, bit-exact

    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t t = 0; t < x.cols(); ++t) {
            double agg = 0.0;
            for (std::size_t j = 0; j < h.incidence.cols(); ++j)
                agg += h.incidence(i, j) * h.centroids(j, t);
            out(i, t) = beta1 * x(i, t) + (1.0 - beta1) * agg;
        }
    }
    return out;
}

}  // namespace hoig::hypergraph
