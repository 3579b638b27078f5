#include "hoig/oinfo.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "hoig/errors.hpp"
#include "hoig/jsonfmt.hpp"

namespace hoig::oinfo {

namespace {

constexpr double kLog2E = 1.4426950408889634074;  // 1/ln(2)
constexpr std::size_t kMaxOutcomes = std::size_t{1} << 20;

std::size_t table_size(const std::vector<int>& cards) {
    std::size_t total = 1;
    for (int c : cards) {
        if (c < 1) throw ConfigError("discrete system: alphabet sizes must be >= 1");
        total *= static_cast<std::size_t>(c);
        if (total > kMaxOutcomes) {
            throw ConfigError("discrete system: outcome table exceeds 2^20 entries");
        }
    }
    return total;
}

void check_pmf(std::span<const double> pmf) {
    double sum = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0)) throw DataError("pmf entries must be non-negative and finite");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw DataError("pmf must sum to 1 within 1e-9, got " + std::to_string(sum));
    }
}

/// Cholesky log-determinant in nats; throws on non-positive-definite input.
double cholesky_logdet(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix l(n, n);
    double logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t t = 0; t < j; ++t) s -= l(i, t) * l(j, t);
            if (i == j) {
                if (s <= 0.0) throw DataError("covariance is not positive definite");
                l(i, i) = std::sqrt(s);
                logdet += 2.0 * std::log(l(i, i));
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return logdet;
}

Matrix principal_submatrix(const Matrix& a, std::span<const int> keep) {
    Matrix sub(keep.size(), keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = 0; j < keep.size(); ++j)
            sub(i, j) = a(static_cast<std::size_t>(keep[i]), static_cast<std::size_t>(keep[j]));
    return sub;
}

std::vector<int> all_but(int n, int skip) {
    std::vector<int> vars;
    vars.reserve(static_cast<std::size_t>(n) - 1);
    for (int v = 0; v < n; ++v)
        if (v != skip) vars.push_back(v);
    return vars;
}

template <typename System, typename MarginalEntropy, typename ComplementEntropy>
InfoReport build_report(const System& sys, double h_joint, MarginalEntropy h_i,
                        ComplementEntropy h_rest, double tol) {
    const int n = sys.n_vars();
    InfoReport r;
    r.h_joint = h_joint;
    r.degenerate_n = n < 3;
    double sum_marginals = 0.0, sum_conditionals = 0.0, expanded_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double hi = h_i(i);
        double hrest = h_rest(i);
        r.h_marginals.push_back(hi);
        r.h_conditionals.push_back(h_joint - hrest);
        sum_marginals += hi;
        sum_conditionals += h_joint - hrest;
        expanded_sum += hi - hrest;
    }
    r.total_correlation = sum_marginals - h_joint;
    r.dual_total_correlation = h_joint - sum_conditionals;
    r.o_information = r.total_correlation - r.dual_total_correlation;
    r.o_information_expanded = (n - 2) * h_joint + expanded_sum;
    if (r.o_information > tol) {
        r.verdict = Verdict::Redundancy;
    } else if (r.o_information < -tol) {
        r.verdict = Verdict::Synergy;
    } else {
        r.verdict = Verdict::Neutral;
    }
    return r;
}

}  // namespace

DiscreteSystem DiscreteSystem::make(std::vector<int> cards, std::vector<double> pmf) {
    if (cards.size() < 2) throw ConfigError("discrete system needs at least 2 variables");
    std::size_t expected = table_size(cards);
    if (pmf.size() != expected) {
        throw DataError("pmf table expected " + std::to_string(expected) + " entries, got " +
                        std::to_string(pmf.size()));
    }
    check_pmf(pmf);
    return DiscreteSystem{std::move(cards), std::move(pmf)};
}

GaussianSystem GaussianSystem::make(Matrix cov) {
    if (cov.rows() != cov.cols()) {
        throw ShapeError("covariance must be square, got " +
                         shape_string(cov.rows(), cov.cols()));
    }
    if (cov.rows() < 2) throw ConfigError("gaussian system needs at least 2 variables");
    for (std::size_t i = 0; i < cov.rows(); ++i)
        for (std::size_t j = i + 1; j < cov.cols(); ++j)
            if (std::abs(cov(i, j) - cov(j, i)) > 1e-9) {
                throw DataError("covariance must be symmetric within 1e-9");
            }
    cholesky_logdet(cov);  // positive-definite gate
    return GaussianSystem{std::move(cov)};
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Redundancy: return "Redundancy";
        case Verdict::Synergy: return "Synergy";
        default: return "Neutral";
    }
}

std::string InfoReport::to_json() const {
    std::ostringstream os;
    os << "{\"n_vars\":" << h_marginals.size()
       << ",\"h_joint\":" << json_number(h_joint)
       << ",\"h_marginals\":" << json_number_list(h_marginals)
       << ",\"h_conditionals\":" << json_number_list(h_conditionals)
       << ",\"total_correlation\":" << json_number(total_correlation)
       << ",\"dual_total_correlation\":" << json_number(dual_total_correlation)
       << ",\"o_information\":" << json_number(o_information)
       << ",\"o_information_expanded\":" << json_number(o_information_expanded)
       << ",\"verdict\":\"" << to_string(verdict) << "\""
       << ",\"degenerate_n\":" << (degenerate_n ? "true" : "false") << "}";
    return os.str();
}

double entropy_discrete(std::span<const double> pmf) {
    check_pmf(pmf);
    double h = 0.0;
    for (double p : pmf)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

std::vector<double> marginal(const DiscreteSystem& sys, std::span<const int> vars) {
    const int n = sys.n_vars();
    std::size_t out_size = 1;
    for (int v : vars) {
        if (v < 0 || v >= n) throw ConfigError("marginal: variable index out of range");
        out_size *= static_cast<std::size_t>(sys.cards[static_cast<std::size_t>(v)]);
    }
    std::vector<double> out(out_size, 0.0);
    std::vector<int> outcome(static_cast<std::size_t>(n), 0);
    for (std::size_t idx = 0; idx < sys.pmf.size(); ++idx) {
        // Decode mixed-radix outcome (first variable slowest).
        std::size_t rem = idx;
        for (int v = n - 1; v >= 0; --v) {
            const auto card = static_cast<std::size_t>(sys.cards[static_cast<std::size_t>(v)]);
            outcome[static_cast<std::size_t>(v)] = static_cast<int>(rem % card);
            rem /= card;
        }
        std::size_t sub = 0;
        for (int v : vars) {
            sub = sub * static_cast<std::size_t>(sys.cards[static_cast<std::size_t>(v)]) +
                  static_cast<std::size_t>(outcome[static_cast<std::size_t>(v)]);
        }
        out[sub] += sys.pmf[idx];
    }
    return out;
}

double gaussian_entropy(const Matrix& cov) {
    if (cov.rows() != cov.cols()) {
        throw ShapeError("gaussian_entropy: covariance must be square, got " +
                         shape_string(cov.rows(), cov.cols()));
    }
    const auto k = static_cast<double>(cov.rows());
    const double log2_2pie = std::log2(2.0 * M_PI * std::exp(1.0));
    return 0.5 * (k * log2_2pie + cholesky_logdet(cov) * kLog2E);
}

double total_correlation(const DiscreteSystem& sys) {
    double h_joint = entropy_discrete(sys.pmf);
    double sum = 0.0;
    for (int i = 0; i < sys.n_vars(); ++i) {
        const int vars[] = {i};
        sum += entropy_discrete(marginal(sys, vars));
    }
    return sum - h_joint;
}

double total_correlation(const GaussianSystem& sys) {
    double sum = 0.0;
    for (int i = 0; i < sys.n_vars(); ++i) {
        const int vars[] = {i};
        sum += gaussian_entropy(principal_submatrix(sys.cov, vars));
    }
    return sum - gaussian_entropy(sys.cov);
}

double dual_total_correlation(const DiscreteSystem& sys) {
    const int n = sys.n_vars();
    double h_joint = entropy_discrete(sys.pmf);
    double sum_conditionals = 0.0;
    for (int i = 0; i < n; ++i) {
        auto rest = all_but(n, i);
        sum_conditionals += h_joint - entropy_discrete(marginal(sys, rest));
    }
    return h_joint - sum_conditionals;
}

double dual_total_correlation(const GaussianSystem& sys) {
    const int n = sys.n_vars();
    double h_joint = gaussian_entropy(sys.cov);
    double sum_conditionals = 0.0;
    for (int i = 0; i < n; ++i) {
        auto rest = all_but(n, i);
        sum_conditionals += h_joint - gaussian_entropy(principal_submatrix(sys.cov, rest));
    }
    return h_joint - sum_conditionals;
}

InfoReport o_information(const DiscreteSystem& sys, double tol) {
    double h_joint = entropy_discrete(sys.pmf);
    return build_report(
        sys, h_joint,
        [&](int i) {
            const int vars[] = {i};
            return entropy_discrete(marginal(sys, vars));
        },
        [&](int i) {
            auto rest = all_but(sys.n_vars(), i);
            return entropy_discrete(marginal(sys, rest));
        },
        tol);
}

InfoReport o_information(const GaussianSystem& sys, double tol) {
    double h_joint = gaussian_entropy(sys.cov);
    return build_report(
        sys, h_joint,
        [&](int i) {
            const int vars[] = {i};
            return gaussian_entropy(principal_submatrix(sys.cov, vars));
        },
        [&](int i) {
            auto rest = all_but(sys.n_vars(), i);
            return gaussian_entropy(principal_submatrix(sys.cov, rest));
        },
        tol);
}

}  // namespace hoig::oinfo
