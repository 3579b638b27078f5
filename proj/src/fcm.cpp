#include "hoig/fcm.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hoig/errors.hpp"
#include "hoig/rng.hpp"

namespace hoig::fcm {

namespace {

void require_fuzzifier(double m) {
    if (!(m > 1.0)) {
        throw ConfigError("fuzzifier must be > 1, got " + std::to_string(m));
    }
}

MembershipMatrix random_membership(std::size_t n, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    MembershipMatrix u(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            u(i, j) = rng.uniform_pos();
            sum += u(i, j);
        }
        for (std::size_t j = 0; j < k; ++j) u(i, j) /= sum;
    }
    return u;
}

}  // namespace

CentroidSet update_centroids(const FeatureMatrix& x, const MembershipMatrix& u, double fuzzifier) {
    require_fuzzifier(fuzzifier);
    if (u.rows() != x.rows()) {
        throw ShapeError("update_centroids: membership expected " +
                         shape_string(x.rows(), u.cols()) + ", got " +
                         shape_string(u.rows(), u.cols()));
    }
    const std::size_t n = x.rows(), d = x.cols(), k = u.cols();
    CentroidSet c(k, d);
    std::vector<double> global_mean;
    for (std::size_t j = 0; j < k; ++j) {
        double denom = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double w = std::pow(u(i, j), fuzzifier);
            denom += w;
            for (std::size_t t = 0; t < d; ++t) c(j, t) += w * x(i, t);
        }
        if (denom == 0.0) {
            // Degenerate cluster: no node carries weight, fall back to the mean of X.
            if (global_mean.empty()) global_mean = colwise_mean(x);
            for (std::size_t t = 0; t < d; ++t) c(j, t) = global_mean[t];
        } else {
            for (std::size_t t = 0; t < d; ++t) c(j, t) /= denom;
        }
    }
    return c;
}

MembershipMatrix update_membership(const FeatureMatrix& x, const CentroidSet& c,
                                   double fuzzifier, double epsilon) {
    require_fuzzifier(fuzzifier);
    if (c.cols() != x.cols()) {
        throw ShapeError("update_membership: centroids expected " +
                         shape_string(c.rows(), x.cols()) + ", got " +
                         shape_string(c.rows(), c.cols()));
    }
    const std::size_t n = x.rows(), k = c.rows();
    const double exponent = 2.0 / (fuzzifier - 1.0);
    MembershipMatrix u(n, k);
    std::vector<double> dist(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) dist[j] = distance(x.row(i), c.row(j)) + epsilon;
        for (std::size_t j = 0; j < k; ++j) {
            double sum = 0.0;
            for (std::size_t t = 0; t < k; ++t) sum += std::pow(dist[j] / dist[t], exponent);
            u(i, j) = 1.0 / sum;
        }
    }
    return u;
}

double objective(const FeatureMatrix& x, const MembershipMatrix& u, const CentroidSet& c,
                 double fuzzifier) {
    if (u.rows() != x.rows() || u.cols() != c.rows() || c.cols() != x.cols()) {
        throw ShapeError("objective: inconsistent shapes: X " +
                         shape_string(x.rows(), x.cols()) + ", U " +
                         shape_string(u.rows(), u.cols()) + ", C " +
                         shape_string(c.rows(), c.cols()));
    }
    double j = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t t = 0; t < c.rows(); ++t)
            j += std::pow(u(i, t), fuzzifier) * squared_distance(x.row(i), c.row(t));
    return j;
}

FcmResult run(const FeatureMatrix& x, int k, const InitStrategy& init, const FcmConfig& cfg) {
    require_fuzzifier(cfg.fuzzifier);
    if (x.rows() == 0 || x.cols() == 0) throw DataError("fcm::run: empty feature matrix");
    if (!all_finite(x)) throw DataError("fcm::run: non-finite feature values");
    if (k < 1 || static_cast<std::size_t>(k) > x.rows()) {
        throw ConfigError("fcm::run: K=" + std::to_string(k) + " must be in [1, N=" +
                          std::to_string(x.rows()) + "]");
    }

    FcmResult res;
    if (const auto* rm = std::get_if<RandomMembership>(&init)) {
        res.membership = random_membership(x.rows(), static_cast<std::size_t>(k), rm->seed);
        res.centroids = update_centroids(x, res.membership, cfg.fuzzifier);
    } else {
        if (const auto* km = std::get_if<KMeansCentroids>(&init)) {
            res.centroids = kmeans(x, k, km->seed, km->kmeans_iters);
        } else {
            const auto& injected = std::get<InjectedCentroids>(init).centroids;
            require_shape("fcm::run", "injected centroids", static_cast<std::size_t>(k),
                          x.cols(), injected.rows(), injected.cols());
            res.centroids = injected;
        }
        // Injected or K-Means centroids define the initial membership.
        res.membership = update_membership(x, res.centroids, cfg.fuzzifier, cfg.epsilon);
    }

    double j = objective(x, res.membership, res.centroids, cfg.fuzzifier);
    res.objective_trace.push_back(j);
    for (int it = 1; it <= cfg.max_iters; ++it) {
        res.centroids = update_centroids(x, res.membership, cfg.fuzzifier);
        res.membership = update_membership(x, res.centroids, cfg.fuzzifier, cfg.epsilon);
        double j_next = objective(x, res.membership, res.centroids, cfg.fuzzifier);
        res.objective_trace.push_back(j_next);
        res.iterations_run = it;
        if (std::abs(j - j_next) < cfg.convergence_tol) {
            res.converged = true;
            break;
        }
        j = j_next;
    }
    return res;
}

std::vector<int> nearest_assignments(const FeatureMatrix& x, const CentroidSet& c) {
    std::vector<int> assign(x.rows(), 0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c.rows(); ++j) {
            double d = squared_distance(x.row(i), c.row(j));
            if (d < best) {
                best = d;
                assign[i] = static_cast<int>(j);
            }
        }
    }
    return assign;
}

CentroidSet kmeans(const FeatureMatrix& x, int k, std::uint64_t seed, int iters) {
    const std::size_t n = x.rows(), d = x.cols(), kk = static_cast<std::size_t>(k);
    if (k < 1 || kk > n) {
        throw ConfigError("kmeans: K=" + std::to_string(k) + " must be in [1, N=" +
                          std::to_string(n) + "]");
    }
    Rng rng(seed);
    CentroidSet c(kk, d);

    // Farthest-point seeding: random first center, then maximal min-distance.
    std::vector<std::size_t> chosen;
    chosen.push_back(rng.index(n));
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    while (chosen.size() < kk) {
        std::size_t last = chosen.back();
        for (std::size_t i = 0; i < n; ++i)
            min_dist[i] = std::min(min_dist[i], squared_distance(x.row(i), x.row(last)));
        std::size_t far = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (min_dist[i] > best) {
                best = min_dist[i];
                far = i;
            }
        }
        chosen.push_back(far);
    }
    for (std::size_t j = 0; j < kk; ++j)
        for (std::size_t t = 0; t < d; ++t) c(j, t) = x(chosen[j], t);

    for (int it = 0; it < iters; ++it) {
        std::vector<int> assign = nearest_assignments(x, c);
        CentroidSet next(kk, d);
        std::vector<std::size_t> counts(kk, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[static_cast<std::size_t>(assign[i])];
            for (std::size_t t = 0; t < d; ++t) next(static_cast<std::size_t>(assign[i]), t) += x(i, t);
        }
        for (std::size_t j = 0; j < kk; ++j) {
            if (counts[j] == 0) {
                for (std::size_t t = 0; t < d; ++t) next(j, t) = c(j, t);
            } else {
                for (std::size_t t = 0; t < d; ++t) next(j, t) /= static_cast<double>(counts[j]);
            }
        }
        if (next == c) break;
        c = next;
    }
    return c;
}

}  // namespace hoig::fcm
