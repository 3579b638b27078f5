#include "hoig/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hoig/amplifier.hpp"
#include "hoig/errors.hpp"
#include "hoig/jsonfmt.hpp"
#include "hoig/parallel.hpp"

namespace hoig::pipeline {

int LayerConfig::resolve_k(std::size_t n_nodes) const {
    if (k > 0) return k;
    int derived = static_cast<int>(std::llround(0.5 * static_cast<double>(n_nodes)));
    return std::max(1, derived);
}

ForwardOutput forward(const Matrix& x, const bank::BankLayer& layer, const LayerConfig& cfg,
                      const bank::PhaseConfig& phase, std::uint64_t rng_seed,
                      const Matrix* injected_init) {
    const int k = cfg.resolve_k(x.rows());

    fcm::InitStrategy init = fcm::KMeansCentroids{rng_seed, cfg.kmeans_iters};
    if (injected_init != nullptr) {
        init = fcm::InjectedCentroids{*injected_init};
    } else if (phase.init_source == bank::InitSource::Prototype) {
        Rng rng(rng_seed);
        init = fcm::InjectedCentroids{
            bank::select_init_centroids(layer, k, std::nullopt, rng, cfg.perturb_sigma)};
    }

    fcm::FcmResult res = fcm::run(x, k, init, cfg.fcm);
    hypergraph::Hypergraph h = hypergraph::build(res.membership, res.centroids, cfg.degree_cap);
    Matrix aggregated = hypergraph::aggregate(x, h, cfg.beta1);

    Matrix ac = amp::structural_affinity(h.incidence);
    Matrix af = amp::feature_affinity(aggregated);
    Matrix fused = amp::fuse(ac, af, cfg.beta2);
    amp::AttentionWeights weights{layer.attention};
    amp::AmplifyResult amplified = amp::amplify(fused, aggregated, weights);

    ForwardOutput out;
    out.amplified = std::move(amplified.amplified);
    out.membership = std::move(res.membership);
    out.centroids = std::move(res.centroids);
    out.attention = std::move(amplified.attention);
    out.cardinality = hypergraph::effective_cardinalities(h);
    out.objective = res.objective_trace.back();
    out.iterations_run = res.iterations_run;
    return out;
}

std::string EpochStats::to_json() const {
    std::ostringstream os;
    os << "{\"epoch\":" << epoch << ",\"batches\":" << batches
       << ",\"skipped_batches\":" << skipped_batches << ",\"samples\":" << samples
       << ",\"gate_checked\":" << gate_checked << ",\"gate_passed\":" << gate_passed
       << ",\"gate_pass_rate\":" << json_number(gate_pass_rate)
       << ",\"mean_objective\":" << json_number(mean_objective)
       << ",\"objective_trace\":" << json_number_list(objective_trace)
       << ",\"bank_drift\":" << json_number(bank_drift)
       << ",\"cardinality\":" << cardinality.to_json() << "}";
    return os.str();
}

namespace {

double global_drift(const Matrix& before, const Matrix& after) {
    double total = 0.0;
    for (std::size_t kk = 0; kk < before.rows(); ++kk)
        total += distance(before.row(kk), after.row(kk));
    return total / static_cast<double>(before.rows());
}

}  // namespace

EpochStats train_epoch(std::span<const Batch> batches, bank::PrototypeBank& bank,
                       const LayerConfig& cfg, int epoch, std::uint64_t seed,
                       int threads) {
    if (cfg.layer_id < 0 || static_cast<std::size_t>(cfg.layer_id) >= bank.layers.size()) {
        throw ConfigError("train_epoch: layer_id " + std::to_string(cfg.layer_id) +
                          " out of range for bank with " +
                          std::to_string(bank.layers.size()) + " layers");
    }
    bank::BankLayer& layer = bank.layers[static_cast<std::size_t>(cfg.layer_id)];
    const bank::PhaseConfig phase = bank::schedule(bank.schedule, epoch, true);
    const Matrix global_before = layer.global;
    // One stream per epoch, not per batch: identical batches must process
    // identically so that full-replacement EMA reaches a fixed point.
    const std::uint64_t epoch_seed = derive_seed(seed, static_cast<std::uint64_t>(epoch));

    EpochStats stats;
    stats.epoch = epoch;
    double objective_sum = 0.0;

    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
        const Batch& batch = batches[bi];
        if (batch.features.empty()) {
            ++stats.skipped_batches;
            continue;
        }
        if (batch.labels.size() != batch.features.size()) {
            throw ConfigError("train_epoch: batch " + std::to_string(bi) + " has " +
                              std::to_string(batch.labels.size()) + " labels for " +
                              std::to_string(batch.features.size()) + " samples");
        }
        for (int y : batch.labels)
            if (y != 0 && y != 1) throw DataError("train_epoch: labels must be 0 or 1");
        ++stats.batches;

        bool gated_out = false;
        if (layer.initialized && phase.tau != -std::numeric_limits<double>::infinity()) {
            bank::GateResult g = bank::gate(batch.features, layer, phase.tau);
            ++stats.gate_checked;
            if (g.pass) ++stats.gate_passed;
            gated_out = !g.pass;
        }

        // Batch-level prototype selection; every sample's FCM starts from it.
        Matrix injected;
        const Matrix* injected_ptr = nullptr;
        if (phase.init_source == bank::InitSource::Prototype) {
            bank::TrainCounts counts;
            for (int y : batch.labels) (y == 1 ? counts.pos_count : counts.neg_count) += 1;
            Rng rng(derive_seed(epoch_seed, 1));
            const int k = cfg.resolve_k(batch.features.front().rows());
            injected = bank::select_init_centroids(layer, k, counts, rng, cfg.perturb_sigma);
            injected_ptr = &injected;
        }

        const std::size_t b_count = batch.features.size();
        std::vector<ForwardOutput> outputs(b_count);
        const std::uint64_t sample_stream = derive_seed(epoch_seed, 2);
        parallel_for(b_count, threads, [&](std::size_t s) {
            outputs[s] = forward(batch.features[s], layer, cfg, phase,
                                 derive_seed(sample_stream, s), injected_ptr);
            outputs[s].gated_out = gated_out;
        });

        double batch_objective = 0.0;
        for (const ForwardOutput& out : outputs) {
            objective_sum += out.objective;
            batch_objective += out.objective;
            stats.cardinality.merge(out.cardinality);
            ++stats.samples;
        }
        stats.objective_trace.push_back(batch_objective / static_cast<double>(b_count));

        if (gated_out) continue;  // forward ran, but the bank must stay untouched

        bank::BatchCentroids bc;
        bc.labels = batch.labels;
        const std::size_t k = outputs.front().centroids.rows();
        bc.pos_weights = Matrix(b_count, k);
        bc.neg_weights = Matrix(b_count, k);
        for (std::size_t s = 0; s < b_count; ++s) {
            bank::LabelCentroids lc = bank::label_aware_centroids(
                batch.features[s], outputs[s].membership, batch.labels[s],
                cfg.fcm.fuzzifier, cfg.fcm.epsilon);
            bc.centroids.push_back(std::move(outputs[s].centroids));
            bc.positive.push_back(std::move(lc.positive));
            bc.negative.push_back(std::move(lc.negative));
            for (std::size_t kk = 0; kk < k; ++kk) {
                bc.pos_weights(s, kk) = lc.pos_weights[kk];
                bc.neg_weights(s, kk) = lc.neg_weights[kk];
            }
        }

        if (!layer.initialized) {
            bank::bootstrap(layer, bc);
            continue;
        }
        bank::AlignedCentroids aligned = phase.alignment == bank::Alignment::Soft
                                             ? bank::soft_align(bc, layer, cfg.fcm.epsilon)
                                             : bank::slot_align(bc, layer, cfg.fcm.epsilon);
        bank::ema_update(layer, aligned, bank.ema_momentum, bank.global_mix);
    }

    bank.schedule.current_epoch = epoch;
    stats.mean_objective = stats.samples ? objective_sum / stats.samples : 0.0;
    stats.gate_pass_rate =
        stats.gate_checked ? static_cast<double>(stats.gate_passed) / stats.gate_checked : 1.0;
    stats.bank_drift =
        layer.initialized && global_before.rows() == layer.global.rows()
            ? global_drift(global_before, layer.global)
            : 0.0;
    return stats;
}

GapScore gap_score(const Matrix& sample_centroids, const bank::BankLayer& layer) {
    require_shape("gap_score", "sample centroids", layer.k(), layer.dim(),
                  sample_centroids.rows(), sample_centroids.cols());
    const std::size_t k = layer.k();
    Matrix sim(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            sim(i, j) = cosine(layer.global.row(i), sample_centroids.row(j));
    std::vector<std::size_t> pi = bank::greedy_match(sim);

    double s_bp = 0.0, s_bn = 0.0;
    for (std::size_t kk = 0; kk < k; ++kk) {
        s_bp += cosine(sample_centroids.row(pi[kk]), layer.positive.row(kk));
        s_bn += cosine(sample_centroids.row(pi[kk]), layer.negative.row(kk));
    }
    s_bp /= static_cast<double>(k);
    s_bn /= static_cast<double>(k);

    GapScore gs;
    gs.s_bp = s_bp;
    gs.s_bn = s_bn;
    // Spoof hypothesis: the class-swapped pairing treats the negative bank as
    // the class-positive reference, so the same two numbers trade places.
    gs.s_sp = s_bn;
    gs.s_sn = s_bp;
    gs.gap = (gs.s_bp + gs.s_sn - gs.s_bn - gs.s_sp) / 2.0;
    return gs;
}

GapClassification gap_classify(std::span<const double> gaps) {
    if (gaps.size() < 2) throw ConfigError("gap_classify: need at least 2 gap scores");
    double lo = gaps[0], hi = gaps[0];
    for (double g : gaps) {
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    if (lo == hi) throw DataError("gap_classify: all gap scores identical; 2-means is degenerate");

    double c0 = lo, c1 = hi;
    for (int it = 0; it < 100; ++it) {
        double sum0 = 0.0, sum1 = 0.0;
        std::size_t n0 = 0, n1 = 0;
        for (double g : gaps) {
            if (std::abs(g - c0) <= std::abs(g - c1)) {
                sum0 += g;
                ++n0;
            } else {
                sum1 += g;
                ++n1;
            }
        }
        double next0 = n0 ? sum0 / static_cast<double>(n0) : c0;
        double next1 = n1 ? sum1 / static_cast<double>(n1) : c1;
        if (next0 == c0 && next1 == c1) break;
        c0 = next0;
        c1 = next1;
    }

    GapClassification out;
    out.threshold = 0.5 * (c0 + c1);
    out.labels.reserve(gaps.size());
    for (double g : gaps) out.labels.push_back(g >= out.threshold ? 1 : 0);
    return out;
}

Matrix dataset_similarity(const std::vector<std::vector<double>>& summaries) {
    if (summaries.size() < 2) {
        throw ConfigError("dataset_similarity: need at least 2 datasets");
    }
    const std::size_t n = summaries.size(), dim = summaries.front().size();
    for (const auto& s : summaries) {
        if (s.size() != dim) {
            throw ShapeError("dataset_similarity: summary length mismatch: expected " +
                             std::to_string(dim) + ", got " + std::to_string(s.size()));
        }
    }
    Matrix sim(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        sim(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double c = cosine(summaries[i], summaries[j]);
            sim(i, j) = c;
            sim(j, i) = c;
        }
    }
    return sim;
}

}  // namespace hoig::pipeline
