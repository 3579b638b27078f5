#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hoig/matrix.hpp"
#include "hoig/pipeline.hpp"
#include "hoig/prototype_bank.hpp"

namespace hoig::io {

/// A batch file of B samples, each an N x D feature matrix.
/// On disk ("HPFM"): magic, u32 version=1, u32 B, u32 N, u32 D, then
/// B*N*D little-endian f32 values in row-major sample order.
struct FeatureSet {
    std::vector<Matrix> samples;

    std::size_t sample_count() const { return samples.size(); }
    std::size_t n_nodes() const { return samples.empty() ? 0 : samples.front().rows(); }
    std::size_t dim() const { return samples.empty() ? 0 : samples.front().cols(); }
};

void write_features(const FeatureSet& fs, const std::string& path);
FeatureSet read_features(const std::string& path);

/// CSV fixture import. Header `node,dim0,...`; a row with node index 0
/// starts a new sample, and all samples must share N and D.
FeatureSet read_features_csv(const std::string& path);

/// Label lines `<sample_index> <0|1>`. Indices must be unique, in range,
/// and cover every sample.
std::vector<int> read_labels(const std::string& path, std::size_t sample_count);

/// Flat `key = value` run configuration; unknown keys are rejected.
struct RunConfig {
    pipeline::LayerConfig layer;
    double mu = 0.9;
    double gamma = 0.5;
    bank::ScheduleState schedule;
    int batch_size = 16;
    std::uint64_t seed = 1234;
};

RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text);

}  // namespace hoig::io
