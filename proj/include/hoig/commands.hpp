#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace hoig::cli {

/// Exit codes shared by every command: 0 success, 1 configuration or usage
/// error, 2 data or format error.
struct CommonArgs {
    std::optional<std::uint64_t> seed;  // overrides any config-file seed
    int threads = 0;                    // 0 = auto
};

struct ClusterArgs {
    std::string features;
    bool from_csv = false;
    int k = 0;
    double fuzzifier = 2.0;
    int max_iters = 5;
    std::string out;  // empty = stdout
    CommonArgs common;
};

struct TrainBankArgs {
    std::string features;
    std::string labels;
    std::string config;  // optional run-config path
    bool from_csv = false;
    int epochs = 0;
    std::string bank_out;
    std::string stats_out;  // optional
    CommonArgs common;
};

struct ForwardArgs {
    std::string features;
    std::string bank;
    bool from_csv = false;
    std::string stats_out;  // empty = stdout
    std::string config;     // optional
    CommonArgs common;
};

struct GapArgs {
    std::string features;
    std::string bank;
    bool from_csv = false;
    std::string out;     // empty = stdout
    std::string config;  // optional
    CommonArgs common;
};

struct OinfoArgs {
    std::string system_json;
    std::string out;  // empty = stdout
    CommonArgs common;  // accepted for interface uniformity; nothing random here
};

int cmd_cluster(const ClusterArgs& args);
int cmd_train_bank(const TrainBankArgs& args);
int cmd_forward(const ForwardArgs& args);
int cmd_gap(const GapArgs& args);
int cmd_analyze_oinfo(const OinfoArgs& args);

}  // namespace hoig::cli
