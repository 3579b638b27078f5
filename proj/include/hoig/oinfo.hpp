#pragma once

#include <span>
#include <string>
#include <vector>

#include "hoig/matrix.hpp"

namespace hoig::oinfo {

/// Exact joint distribution over n discrete variables, stored as a dense
/// table in mixed-radix order (first variable slowest).
struct DiscreteSystem {
    std::vector<int> cards;   // per-variable alphabet sizes
    std::vector<double> pmf;  // size = product of cards, sums to 1

    int n_vars() const { return static_cast<int>(cards.size()); }

    /// Validates alphabet sizes, table size (<= 2^20 outcomes),
    /// non-negativity, and normalization within 1e-9.
    static DiscreteSystem make(std::vector<int> cards, std::vector<double> pmf);
};

/// Joint Gaussian described by its covariance; must be symmetric within
/// 1e-9 and positive definite.
struct GaussianSystem {
    Matrix cov;

    int n_vars() const { return static_cast<int>(cov.rows()); }

    static GaussianSystem make(Matrix cov);
};

enum class Verdict { Redundancy, Synergy, Neutral };

std::string to_string(Verdict v);

/// All quantities in bits.
struct InfoReport {
    double h_joint = 0.0;
    std::vector<double> h_marginals;     // H(X_i)
    std::vector<double> h_conditionals;  // H(X_i | X_-i)
    double total_correlation = 0.0;      // C
    double dual_total_correlation = 0.0; // B
    double o_information = 0.0;          // C - B
    double o_information_expanded = 0.0; // (n-2) H(X) + sum_i [H(X_i) - H(X_-i)]
    Verdict verdict = Verdict::Neutral;
    bool degenerate_n = false;  // n < 3: sign carries no synergy/redundancy meaning

    std::string to_json() const;
};

/// Shannon entropy -sum p log2 p with 0 log 0 = 0. The table must sum to 1
/// within 1e-9.
double entropy_discrete(std::span<const double> pmf);

/// Marginal table over the given variable indices (ascending order expected).
std::vector<double> marginal(const DiscreteSystem& sys, std::span<const int> vars);

/// Differential entropy of a Gaussian block in bits:
/// 0.5 log2((2 pi e)^k det cov).
double gaussian_entropy(const Matrix& cov);

double total_correlation(const DiscreteSystem& sys);
double total_correlation(const GaussianSystem& sys);
double dual_total_correlation(const DiscreteSystem& sys);
double dual_total_correlation(const GaussianSystem& sys);

InfoReport o_information(const DiscreteSystem& sys, double tol = 1e-9);
InfoReport o_information(const GaussianSystem& sys, double tol = 1e-6);

}  // namespace hoig::oinfo
