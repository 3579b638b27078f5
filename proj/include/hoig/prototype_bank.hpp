#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hoig/matrix.hpp"
#include "hoig/rng.hpp"

namespace hoig::bank {

struct ScheduleState {
    int current_epoch = 0;
    int warm_start_epoch = 5;        // prototypes replace K-Means init here
    int alignment_switch_epoch = 20; // soft alignment before, slot after
    int total_epochs = 100;
    double tau_start = 0.1;          // decays linearly to 0 at total_epochs
};

enum class InitSource { KMeans, Prototype };
enum class Alignment { Soft, Slot };

struct PhaseConfig {
    InitSource init_source = InitSource::KMeans;
    Alignment alignment = Alignment::Soft;
    double tau = 0.0;  // -inf disables gating
    bool prototypes_frozen = false;
};

/// One layer's long-term memory: class-aware and global prototype sets plus
/// the layer's attention projection.
struct BankLayer {
    Matrix positive;   // K x D
    Matrix negative;   // K x D
    Matrix global;     // K x D
    std::vector<double> attention;  // w_alpha, length D
    bool initialized = false;

    std::size_t k() const { return global.rows(); }
    std::size_t dim() const { return global.cols(); }
};

struct PrototypeBank {
    std::vector<BankLayer> layers;
    double ema_momentum = 0.9;  // mu
    double global_mix = 0.5;    // gamma
    ScheduleState schedule;
};

/// Fresh bank with zeroed prototypes (uninitialized until bootstrap) and
/// seeded attention weights per layer.
PrototypeBank make_bank(std::size_t layer_count, std::size_t k, std::size_t dim,
                        std::uint64_t seed, double mu = 0.9, double gamma = 0.5,
                        ScheduleState schedule = {});

/// Per-sample clustering evidence collected from one batch.
struct BatchCentroids {
    std::vector<Matrix> centroids;  // B entries, K x D  (c_{b,k})
    std::vector<Matrix> positive;   // B entries, K x D  (label-weighted)
    std::vector<Matrix> negative;   // B entries, K x D
    Matrix pos_weights;             // B x K (alpha^+)
    Matrix neg_weights;             // B x K (alpha^-)
    std::vector<int> labels;        // B, each 0 or 1

    std::size_t batch_size() const { return centroids.size(); }
};

struct AlignedCentroids {
    Matrix global;    // K x D
    Matrix positive;  // K x D
    Matrix negative;  // K x D
};

struct GateResult {
    bool pass = false;
    double similarity = 0.0;
};

/// Cosine between the grand mean of all batch node features and the mean
/// global prototype row; passes when similarity >= tau. Zero-norm vectors
/// score 0.
GateResult gate(std::span<const Matrix> batch_features, const BankLayer& layer, double tau);

struct TrainCounts {
    int pos_count = 0;
    int neg_count = 0;
};

/// Initialization centroids drawn from the bank. Eval (no counts): the
/// global rows verbatim. Train: ceil(0.2 K) global slots first, the rest
/// sampled with replacement from the class banks in pos:neg proportion
/// (rounded, remainder to the majority class). All slots then get additive
/// Gaussian noise of scale perturb_sigma.
Matrix select_init_centroids(const BankLayer& layer, int k,
                             std::optional<TrainCounts> counts, Rng& rng,
                             double perturb_sigma);

struct LabelCentroids {
    Matrix positive;                 // K x D
    Matrix negative;                 // K x D
    std::vector<double> pos_weights; // K (column sums of w^+)
    std::vector<double> neg_weights; // K
};

/// One label-weighted centroid update: w^+_nk = (y u_nk)^m,
/// c^+_k = sum_n w^+_nk x_n / (sum_n w^+_nk + eps); the negative side uses 1-y.
LabelCentroids label_aware_centroids(const Matrix& x, const Matrix& u, int label,
                                     double fuzzifier, double epsilon);

/// Greedy bijection on {0..K-1}: repeatedly takes the highest remaining
/// similarity entry (ties to the lowest row, then column). pi[k] = matched column.
std::vector<std::size_t> greedy_match(const Matrix& similarity);

/// Batch means (global: plain mean over samples; class: weight-averaged),
/// then reordered by greedy cosine matching of the global means against the
/// global prototypes. One permutation is shared by all three sets.
AlignedCentroids soft_align(const BatchCentroids& batch, const BankLayer& layer,
                            double epsilon = 1e-8);

/// Flattens all B*K batch centroids, softly assigns each to prototype slots
/// via softmax cosine weights, then averages the slotted result with the
/// plain batch means. Class-conditional sets reuse the global assignment
/// weights.
AlignedCentroids slot_align(const BatchCentroids& batch, const BankLayer& layer,
                            double epsilon = 1e-8);

/// P^+ <- mu C~^+ + (1-mu) P^+ (same for P^-); the global set then blends
/// the aligned centroids with the class-neutral prototype built from the
/// *updated* class banks.
void ema_update(BankLayer& layer, const AlignedCentroids& aligned, double mu, double gamma);

/// Phase for an epoch: warm-start K-Means then prototype init, soft then
/// slot alignment, and the linear tau decay. Evaluation freezes prototypes
/// and disables gating.
PhaseConfig schedule(const ScheduleState& state, int epoch, bool training = true);

/// First-batch initialization: all three prototype sets become the batch
/// mean of the per-sample centroids. Calling it on an initialized layer is
/// an error.
void bootstrap(BankLayer& layer, const BatchCentroids& batch);

void save(const PrototypeBank& bank, const std::string& path);
PrototypeBank load(const std::string& path);

}  // namespace hoig::bank
