#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "hoig/matrix.hpp"

namespace hoig::fcm {

/// N x D node features of one graph sample.
using FeatureMatrix = Matrix;
/// N x K soft incidence between nodes and hyperedges; rows sum to 1.
using MembershipMatrix = Matrix;
/// K x D hyperedge centroids.
using CentroidSet = Matrix;

struct FcmConfig {
    double fuzzifier = 2.0;
    int max_iters = 5;
    double epsilon = 1e-8;
    double convergence_tol = 1e-4;  // absolute change in the objective
};

/// Uniform positives per row, normalized to sum 1.
struct RandomMembership {
    std::uint64_t seed = 0;
};

/// Lloyd's K-Means with farthest-point seeding provides the starting centroids.
struct KMeansCentroids {
    std::uint64_t seed = 0;
    int kmeans_iters = 10;
};

/// Externally supplied starting centroids (prototype injection path).
/// These define the initial membership before any update iteration runs.
struct InjectedCentroids {
    CentroidSet centroids;
};

using InitStrategy = std::variant<RandomMembership, KMeansCentroids, InjectedCentroids>;

struct FcmResult {
    MembershipMatrix membership;
    CentroidSet centroids;
    std::vector<double> objective_trace;  // non-increasing
    int iterations_run = 0;
    bool converged = false;
};

/// c_k = sum_i u_ik^m x_i / sum_i u_ik^m. A cluster whose weights sum to
/// zero falls back to the global mean of X.
CentroidSet update_centroids(const FeatureMatrix& x, const MembershipMatrix& u, double fuzzifier);

/// d_ik = ||x_i - c_k|| + epsilon; u_ij = 1 / sum_k (d_ij/d_ik)^(2/(m-1)).
MembershipMatrix update_membership(const FeatureMatrix& x, const CentroidSet& c,
                                   double fuzzifier, double epsilon);

/// J = sum_i sum_k u_ik^m ||x_i - c_k||^2.
double objective(const FeatureMatrix& x, const MembershipMatrix& u, const CentroidSet& c,
                 double fuzzifier);

/// Alternates centroid and membership updates from the given initialization
/// until max_iters or |dJ| < convergence_tol.
FcmResult run(const FeatureMatrix& x, int k, const InitStrategy& init, const FcmConfig& cfg);

/// Lloyd's algorithm with farthest-point seeding. Ties in assignment and
/// seeding go to the lowest index; empty clusters keep their centroid.
CentroidSet kmeans(const FeatureMatrix& x, int k, std::uint64_t seed, int iters);

/// Index of the nearest centroid per row (ties to the lowest index).
std::vector<int> nearest_assignments(const FeatureMatrix& x, const CentroidSet& c);

}  // namespace hoig::fcm
