#include <cstdint>
#include <iostream>

#include <CLI11.hpp>

#include "hoig/commands.hpp"

namespace {

void add_common(CLI::App* cmd, hoig::cli::CommonArgs& common, std::uint64_t& seed_slot) {
    cmd->add_option("--seed", seed_slot, "Seed for all randomized steps")
        ->each([&common, &seed_slot](const std::string&) { common.seed = seed_slot; });
    cmd->add_option("--threads", common.threads, "Worker threads (0 = auto)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hypergraph high-order relational modeling toolkit"};
    app.require_subcommand(1);

    hoig::cli::ClusterArgs cluster;
    hoig::cli::TrainBankArgs train;
    hoig::cli::ForwardArgs forward;
    hoig::cli::GapArgs gap;
    hoig::cli::OinfoArgs oinfo;
    std::uint64_t seed_slot = 0;

    auto* c = app.add_subcommand("cluster", "Soft-cluster each sample and report FCM stats");
    c->add_option("features", cluster.features, "Feature file (HPFM)")->required();
    c->add_flag("--from-csv", cluster.from_csv, "Read features from CSV (node,dim0,...)");
    c->add_option("--k", cluster.k, "Number of hyperedges")->required();
    c->add_option("--m", cluster.fuzzifier, "Fuzzifier (> 1)");
    c->add_option("--max-iters", cluster.max_iters, "Maximum FCM iterations");
    c->add_option("--out", cluster.out, "Output JSON path (default stdout)");
    add_common(c, cluster.common, seed_slot);

    auto* t = app.add_subcommand("train-bank", "Train a prototype bank over labeled samples");
    t->add_option("features", train.features, "Feature file (HPFM)")->required();
    t->add_option("labels", train.labels, "Label file (<sample_index> <0|1>)")->required();
    t->add_flag("--from-csv", train.from_csv, "Read features from CSV");
    t->add_option("--config", train.config, "Run config (key = value lines)");
    t->add_option("--epochs", train.epochs, "Training epochs (0 = bootstrap only)")->required();
    t->add_option("--bank-out", train.bank_out, "Output bank path")->required();
    t->add_option("--stats-out", train.stats_out, "Per-epoch stats JSON path");
    add_common(t, train.common, seed_slot);

    auto* f = app.add_subcommand("forward", "Run the frozen-bank forward pass");
    f->add_option("features", forward.features, "Feature file (HPFM)")->required();
    f->add_flag("--from-csv", forward.from_csv, "Read features from CSV");
    f->add_option("--bank", forward.bank, "Bank file")->required();
    f->add_option("--config", forward.config, "Run config (key = value lines)");
    f->add_option("--stats-out", forward.stats_out, "Output JSON path (default stdout)");
    add_common(f, forward.common, seed_slot);

    auto* g = app.add_subcommand("gap", "Score samples against class prototypes");
    g->add_option("features", gap.features, "Feature file (HPFM)")->required();
    g->add_flag("--from-csv", gap.from_csv, "Read features from CSV");
    g->add_option("--bank", gap.bank, "Bank file")->required();
    g->add_option("--config", gap.config, "Run config (key = value lines)");
    g->add_option("--out", gap.out, "Output CSV path (default stdout)");
    add_common(g, gap.common, seed_slot);

    auto* o = app.add_subcommand("analyze-oinfo", "Total correlation, dual total "
                                 "correlation, and O-information of a joint system");
    o->add_option("system", oinfo.system_json, "System description JSON")->required();
    o->add_option("--out", oinfo.out, "Output JSON path (default stdout)");
    add_common(o, oinfo.common, seed_slot);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    if (c->parsed()) return hoig::cli::cmd_cluster(cluster);
    if (t->parsed()) return hoig::cli::cmd_train_bank(train);
    if (f->parsed()) return hoig::cli::cmd_forward(forward);
    if (g->parsed()) return hoig::cli::cmd_gap(gap);
    if (o->parsed()) return hoig::cli::cmd_analyze_oinfo(oinfo);
    return 1;
}
