#include "hoig/amplifier.hpp"

#include <cmath>
#include <string>

#include "hoig/errors.hpp"
#include "hoig/rng.hpp"

namespace hoig::amp {

AttentionWeights AttentionWeights::seeded(std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    AttentionWeights aw;
    aw.w.resize(dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (double& v : aw.w) v = rng.normal() * scale;
    return aw;
}

Matrix structural_affinity(const Matrix& membership) {
    return matmul(membership, transpose(membership));
}

Matrix feature_affinity(const Matrix& features) {
    Matrix a = matmul(features, transpose(features));
    const double scale = 1.0 / std::sqrt(static_cast<double>(features.cols()));
    for (double& v : a.data()) v *= scale;
    return a;
}

Matrix fuse(const Matrix& ac, const Matrix& af, double beta2) {
    if (beta2 < 0.0 || beta2 > 1.0) {
        throw ConfigError("amp::fuse: beta2 must be in [0,1], got " + std::to_string(beta2));
    }
    require_shape("amp::fuse", "feature affinity", ac.rows(), ac.cols(), af.rows(), af.cols());
    Matrix fused(ac.rows(), ac.cols());
    std::vector<double> row(ac.cols());
    for (std::size_t i = 0; i < ac.rows(); ++i) {
        for (std::size_t j = 0; j < ac.cols(); ++j)
            row[j] = beta2 * ac(i, j) + (1.0 - beta2) * af(i, j);
        std::vector<double> sm = softmax(row);
        for (std::size_t j = 0; j < ac.cols(); ++j) fused(i, j) = sm[j];
    }
    return fused;
}

AmplifyResult amplify(const Matrix& a, const Matrix& features, const AttentionWeights& w) {
    if (a.rows() != a.cols() || a.cols() != features.rows()) {
        throw ShapeError("amp::amplify: affinity expected " +
                         shape_string(features.rows(), features.rows()) + ", got " +
                         shape_string(a.rows(), a.cols()));
    }
    if (w.w.size() != features.cols()) {
        throw ShapeError("amp::amplify: attention weights expected length " +
                         std::to_string(features.cols()) + ", got " +
                         std::to_string(w.w.size()));
    }
    const std::size_t n = features.rows(), d = features.cols();

    Matrix z = matmul(a, features);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = dot(z.row(i), w.w);

    AmplifyResult res;
    res.attention = softmax(scores);

    Matrix scaled = z;
    for (std::size_t i = 0; i < n; ++i) {
        const double gain = 1.0 + res.attention[i];
        for (std::size_t t = 0; t < d; ++t) scaled(i, t) *= gain;
    }
    res.amplified = matmul(transpose(a), scaled);
    return res;
}

}  // namespace hoig::amp
