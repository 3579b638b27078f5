#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hoig/fcm.hpp"
#include "hoig/hypergraph.hpp"
#include "hoig/matrix.hpp"
#include "hoig/prototype_bank.hpp"

namespace hoig::pipeline {

struct LayerConfig {
    int k = 0;  // hyperedge count; 0 derives round(0.5 * N)
    std::optional<int> degree_cap;
    double beta1 = 0.9;
    double beta2 = 0.6;
    fcm::FcmConfig fcm;
    int kmeans_iters = 10;
    double perturb_sigma = 1e-3;
    int layer_id = 0;

    int resolve_k(std::size_t n_nodes) const;
};

struct ForwardOutput {
    Matrix amplified;   // X''
    Matrix membership;  // final U
    Matrix centroids;   // final C
    std::vector<double> attention;
    hypergraph::CardinalityHistogram cardinality;
    bool gated_out = false;
    double objective = 0.0;
    int iterations_run = 0;
};

/// One layer forward pass: initialization (K-Means, bank prototypes, or an
/// injected centroid set), FCM clustering, hyperedge aggregation, affinity
/// fusion, and attention amplification.
ForwardOutput forward(const Matrix& x, const bank::BankLayer& layer, const LayerConfig& cfg,
                      const bank::PhaseConfig& phase, std::uint64_t rng_seed,
                      const Matrix* injected_init = nullptr);

struct Batch {
    std::vector<Matrix> features;  // B samples, each N x D
    std::vector<int> labels;       // B, each 0 or 1
};

struct EpochStats {
    int epoch = 0;
    int batches = 0;
    int skipped_batches = 0;
    int samples = 0;
    int gate_checked = 0;
    int gate_passed = 0;
    double gate_pass_rate = 1.0;
    double mean_objective = 0.0;
    std::vector<double> objective_trace;  // per-batch mean objective
    double bank_drift = 0.0;  // mean L2 change of the global prototype rows
    hypergraph::CardinalityHistogram cardinality;

    std::string to_json() const;
};

/// One epoch of prototype learning over the given batches. The first batch
/// ever seen bootstraps the bank layer; gated-out batches still run forward
/// but contribute nothing to the bank.
EpochStats train_epoch(std::span<const Batch> batches, bank::PrototypeBank& bank,
                       const LayerConfig& cfg, int epoch, std::uint64_t seed,
                       int threads = 1);

struct GapScore {
    double s_bp = 0.0;  // bona-fide hypothesis vs positive bank
    double s_bn = 0.0;  // bona-fide hypothesis vs negative bank
    double s_sp = 0.0;  // spoof hypothesis, class-swapped pairing
    double s_sn = 0.0;
    double gap = 0.0;   // (s_bp + s_sn - s_bn - s_sp) / 2
};

/// Aligns sample centroids to the bank's global prototypes (greedy cosine),
/// then scores them against the class banks under both label hypotheses.
GapScore gap_score(const Matrix& sample_centroids, const bank::BankLayer& layer);

struct GapClassification {
    std::vector<int> labels;  // 1 = bona-fide (gap >= threshold)
    double threshold = 0.0;
};

/// 1-D 2-means over the gap scores; the threshold is the mean of the two
/// final centroids.
GapClassification gap_classify(std::span<const double> gaps);

/// Pairwise cosine similarity of per-dataset gap summary vectors; unit
/// diagonal.
Matrix dataset_similarity(const std::vector<std::vector<double>>& summaries);

}  // namespace hoig::pipeline
