#include "hoig/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "hoig/errors.hpp"
#include "hoig/feature_io.hpp"
#include "hoig/fcm.hpp"
#include "hoig/jsonfmt.hpp"
#include "hoig/oinfo.hpp"
#include "hoig/parallel.hpp"
#include "hoig/pipeline.hpp"
#include "hoig/prototype_bank.hpp"
#include "hoig/rng.hpp"

namespace hoig::cli {

namespace {

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream file(path, std::ios::trunc);
    if (!file) throw DataError("cannot open " + path + " for writing");
    file << content;
    if (!file) throw DataError("write failed for " + path);
}

io::FeatureSet load_features(const std::string& path, bool from_csv) {
    return from_csv ? io::read_features_csv(path) : io::read_features(path);
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty() || !std::filesystem::exists(path)) {
        throw ConfigError("missing " + what + " file: " + (path.empty() ? "<none>" : path));
    }
}

std::vector<pipeline::Batch> make_batches(const io::FeatureSet& fs,
                                          const std::vector<int>& labels,
                                          int batch_size) {
    std::vector<pipeline::Batch> batches;
    for (std::size_t start = 0; start < fs.sample_count();
         start += static_cast<std::size_t>(batch_size)) {
        pipeline::Batch batch;
        std::size_t end =
            std::min(fs.sample_count(), start + static_cast<std::size_t>(batch_size));
        for (std::size_t i = start; i < end; ++i) {
            batch.features.push_back(fs.samples[i]);
            batch.labels.push_back(labels[i]);
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

/// Evaluation-phase forward pass over every sample, parallel across samples.
std::vector<pipeline::ForwardOutput> eval_forward_all(const io::FeatureSet& fs,
                                                      const bank::PrototypeBank& pb,
                                                      const pipeline::LayerConfig& cfg,
                                                      std::uint64_t seed, int threads) {
    const auto& layer = pb.layers.at(static_cast<std::size_t>(cfg.layer_id));
    bank::PhaseConfig phase = bank::schedule(pb.schedule, pb.schedule.current_epoch, false);
    std::vector<pipeline::ForwardOutput> outputs(fs.sample_count());
    parallel_for(fs.sample_count(), threads, [&](std::size_t s) {
        outputs[s] = pipeline::forward(fs.samples[s], layer, cfg, phase,
                                       derive_seed(seed, s), nullptr);
    });
    return outputs;
}

pipeline::LayerConfig layer_config_for_bank(const std::string& config_path,
                                            const bank::PrototypeBank& pb) {
    pipeline::LayerConfig cfg;
    if (!config_path.empty()) cfg = io::parse_run_config(config_path).layer;
    if (cfg.layer_id < 0 || static_cast<std::size_t>(cfg.layer_id) >= pb.layers.size()) {
        throw ConfigError("layer_id " + std::to_string(cfg.layer_id) +
                          " out of range for bank with " + std::to_string(pb.layers.size()) +
                          " layers");
    }
    const auto& layer = pb.layers[static_cast<std::size_t>(cfg.layer_id)];
    if (cfg.k != 0 && static_cast<std::size_t>(cfg.k) != layer.k()) {
        throw ConfigError("config K=" + std::to_string(cfg.k) + " does not match bank K=" +
                          std::to_string(layer.k()));
    }
    cfg.k = static_cast<int>(layer.k());
    return cfg;
}

}  // namespace

int cmd_cluster(const ClusterArgs& args) {
    return run_guarded([&] {
        require_file(args.features, "feature");
        io::FeatureSet fs = load_features(args.features, args.from_csv);
        if (args.k < 1 || static_cast<std::size_t>(args.k) > fs.n_nodes()) {
            throw ConfigError("K=" + std::to_string(args.k) + " must be in [1, N=" +
                              std::to_string(fs.n_nodes()) + "]");
        }
        fcm::FcmConfig cfg;
        cfg.fuzzifier = args.fuzzifier;
        cfg.max_iters = args.max_iters;
        const std::uint64_t seed = args.common.seed.value_or(1234);

        std::vector<fcm::FcmResult> results(fs.sample_count());
        parallel_for(fs.sample_count(), args.common.threads, [&](std::size_t s) {
            results[s] = fcm::run(fs.samples[s], args.k,
                                  fcm::RandomMembership{derive_seed(seed, s)}, cfg);
        });

        std::ostringstream os;
        os << "[";
        for (std::size_t s = 0; s < results.size(); ++s) {
            const fcm::FcmResult& r = results[s];
            double max_dev = 0.0;
            for (std::size_t i = 0; i < r.membership.rows(); ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < r.membership.cols(); ++j) sum += r.membership(i, j);
                max_dev = std::max(max_dev, std::abs(sum - 1.0));
            }
            if (s) os << ",";
            os << "{\"sample\":" << s << ",\"objective\":"
               << json_number(r.objective_trace.back())
               << ",\"iterations\":" << r.iterations_run
               << ",\"converged\":" << (r.converged ? "true" : "false")
               << ",\"row_sum_max_dev\":" << json_number(max_dev) << "}";
        }
        os << "]\n";
        write_output(args.out, os.str());
    });
}

int cmd_train_bank(const TrainBankArgs& args) {
    return run_guarded([&] {
        require_file(args.features, "feature");
        require_file(args.labels, "label");
        if (args.bank_out.empty()) throw ConfigError("--bank-out is required");
        if (args.epochs < 0) throw ConfigError("--epochs must be >= 0");

        io::RunConfig cfg;
        if (!args.config.empty()) cfg = io::parse_run_config(args.config);
        io::FeatureSet fs = load_features(args.features, args.from_csv);
        std::vector<int> labels = io::read_labels(args.labels, fs.sample_count());
        const std::uint64_t seed = args.common.seed.value_or(cfg.seed);

        const int k = cfg.layer.resolve_k(fs.n_nodes());
        cfg.layer.k = k;
        bank::PrototypeBank pb =
            bank::make_bank(static_cast<std::size_t>(cfg.layer.layer_id) + 1,
                            static_cast<std::size_t>(k), fs.dim(), seed, cfg.mu, cfg.gamma,
                            cfg.schedule);

        std::vector<pipeline::Batch> batches = make_batches(fs, labels, cfg.batch_size);
        std::ostringstream stats;
        stats << "[";
        if (args.epochs == 0) {
            // Bootstrap only: the first batch initializes the prototypes.
            std::span<const pipeline::Batch> first(batches.data(), 1);
            pipeline::EpochStats es =
                pipeline::train_epoch(first, pb, cfg.layer, 0, seed, args.common.threads);
            stats << es.to_json();
        } else {
            for (int epoch = 0; epoch < args.epochs; ++epoch) {
                pipeline::EpochStats es = pipeline::train_epoch(
                    batches, pb, cfg.layer, epoch, seed, args.common.threads);
                if (epoch) stats << ",";
                stats << es.to_json();
            }
        }
        stats << "]\n";
        bank::save(pb, args.bank_out);
        if (!args.stats_out.empty()) write_output(args.stats_out, stats.str());
    });
}

int cmd_forward(const ForwardArgs& args) {
    return run_guarded([&] {
        require_file(args.features, "feature");
        require_file(args.bank, "bank");
        io::FeatureSet fs = load_features(args.features, args.from_csv);
        bank::PrototypeBank pb = bank::load(args.bank);
        pipeline::LayerConfig cfg = layer_config_for_bank(args.config, pb);
        const std::uint64_t seed = args.common.seed.value_or(1234);

        std::vector<pipeline::ForwardOutput> outputs =
            eval_forward_all(fs, pb, cfg, seed, args.common.threads);

        hypergraph::CardinalityHistogram total;
        std::ostringstream os;
        os << "{\"samples\":[";
        for (std::size_t s = 0; s < outputs.size(); ++s) {
            const pipeline::ForwardOutput& out = outputs[s];
            total.merge(out.cardinality);
            double att_max = 0.0;
            std::size_t att_arg = 0;
            for (std::size_t i = 0; i < out.attention.size(); ++i) {
                if (out.attention[i] > att_max) {
                    att_max = out.attention[i];
                    att_arg = i;
                }
            }
            if (s) os << ",";
            os << "{\"sample\":" << s << ",\"objective\":" << json_number(out.objective)
               << ",\"iterations\":" << out.iterations_run
               << ",\"attention_max\":" << json_number(att_max)
               << ",\"attention_argmax\":" << att_arg
               << ",\"cardinality\":" << out.cardinality.to_json() << "}";
        }
        os << "],\"cardinality\":" << total.to_json() << "}\n";
        write_output(args.stats_out, os.str());
    });
}

int cmd_gap(const GapArgs& args) {
    return run_guarded([&] {
        require_file(args.features, "feature");
        require_file(args.bank, "bank");
        io::FeatureSet fs = load_features(args.features, args.from_csv);
        bank::PrototypeBank pb = bank::load(args.bank);
        pipeline::LayerConfig cfg = layer_config_for_bank(args.config, pb);
        const auto& layer = pb.layers.at(static_cast<std::size_t>(cfg.layer_id));
        const std::uint64_t seed = args.common.seed.value_or(1234);

        std::vector<pipeline::ForwardOutput> outputs =
            eval_forward_all(fs, pb, cfg, seed, args.common.threads);
        std::vector<pipeline::GapScore> scores;
        std::vector<double> gaps;
        scores.reserve(outputs.size());
        for (const pipeline::ForwardOutput& out : outputs) {
            scores.push_back(pipeline::gap_score(out.centroids, layer));
            gaps.push_back(scores.back().gap);
        }
        pipeline::GapClassification cls = pipeline::gap_classify(gaps);

        std::ostringstream os;
        os << "sample,s_bp,s_bn,s_sp,s_sn,gap,label,threshold\n";
        for (std::size_t s = 0; s < scores.size(); ++s) {
            const pipeline::GapScore& g = scores[s];
            os << s << "," << json_number(g.s_bp) << "," << json_number(g.s_bn) << ","
               << json_number(g.s_sp) << "," << json_number(g.s_sn) << ","
               << json_number(g.gap) << "," << cls.labels[s] << ","
               << json_number(cls.threshold) << "\n";
        }
        write_output(args.out, os.str());
    });
}

int cmd_analyze_oinfo(const OinfoArgs& args) {
    return run_guarded([&] {
        require_file(args.system_json, "system description");
        std::ifstream file(args.system_json);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(file);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("cannot parse " + args.system_json + ": " + e.what());
        }

        oinfo::InfoReport report;
        try {
            const std::string type = doc.at("type").get<std::string>();
            if (type == "discrete") {
                auto cards = doc.at("cards").get<std::vector<int>>();
                auto pmf = doc.at("pmf").get<std::vector<double>>();
                report = oinfo::o_information(
                    oinfo::DiscreteSystem::make(std::move(cards), std::move(pmf)));
            } else if (type == "gaussian") {
                auto rows = doc.at("cov").get<std::vector<std::vector<double>>>();
                Matrix cov(rows.size(), rows.empty() ? 0 : rows.front().size());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    if (rows[i].size() != cov.cols()) {
                        throw DataError("covariance rows have inconsistent lengths");
                    }
                    for (std::size_t j = 0; j < rows[i].size(); ++j) cov(i, j) = rows[i][j];
                }
                report = oinfo::o_information(oinfo::GaussianSystem::make(std::move(cov)));
            } else {
                throw DataError("unknown system type '" + type +
                                "' (expected 'discrete' or 'gaussian')");
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError("invalid system description: " + std::string(e.what()));
        }
        write_output(args.out, report.to_json() + "\n");
    });
}

}  // namespace hoig::cli
