#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hoig/matrix.hpp"

namespace hoig::hypergraph {

/// Soft hypergraph: membership-valued incidence (possibly degree-capped)
/// plus the hyperedge centroids that define it.
struct Hypergraph {
    Matrix incidence;   // N x K
    Matrix centroids;   // K x D
    std::optional<int> degree_cap;
    std::vector<std::size_t> zeroed_rows;  // rows left all-zero by capping
};

struct CardinalityHistogram {
    std::map<int, int> counts;  // cardinality -> hyperedge count
    int total_hyperedges = 0;
    int n_nodes = 0;

    void merge(const CardinalityHistogram& other);
    std::string to_json() const;  // {"n_nodes":N,"total":K,"counts":{"<card>":n,...}}
};

/// With a degree cap D, each hyperedge keeps its D largest memberships
/// (ties to the lower node index) and rows that lost mass are renormalized.
/// Degree-free leaves the incidence untouched.
Hypergraph build(const Matrix& membership, const Matrix& centroids, std::optional<int> degree_cap);

/// Cardinality of a hyperedge = number of nodes with incidence strictly
/// above 1/D_eff, where D_eff is the cap if set, else N.
CardinalityHistogram effective_cardinalities(const Hypergraph& h);

/// Residual fusion back to nodes: x'_i = b1 * x_i + (1-b1) * sum_k u_ik c_k.
Matrix aggregate(const Matrix& x, const Hypergraph& h, double beta1);

}  // namespace hoig::hypergraph
