#pragma once

#include <cstdint>
#include <vector>

#include "hoig/matrix.hpp"

namespace hoig::amp {

/// Per-node attention projection vector, seeded or loaded from a bank file.
/// Not trained here; it only scores relational evidence.
struct AttentionWeights {
    std::vector<double> w;  // length D

    /// Standard normal entries scaled by 1/sqrt(dim).
    static AttentionWeights seeded(std::size_t dim, std::uint64_t seed);
};

/// Structural self-similarity U U^T.
Matrix structural_affinity(const Matrix& membership);

/// Feature self-similarity X' X'^T / sqrt(D).
Matrix feature_affinity(const Matrix& features);

/// Row-wise softmax of b2 * Ac + (1-b2) * Af; each output row sums to 1.
Matrix fuse(const Matrix& ac, const Matrix& af, double beta2);

struct AmplifyResult {
    Matrix amplified;               // X'' = A^T ((1+alpha) ⊙ Z)
    std::vector<double> attention;  // alpha, a probability vector over nodes
};

/// Z = A X'; alpha = softmax(Z w); X'' = A^T with row i of Z scaled by (1+alpha_i).
AmplifyResult amplify(const Matrix& a, const Matrix& features, const AttentionWeights& w);

}  // namespace hoig::amp
