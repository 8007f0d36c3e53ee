#pragma once

#include <map>
#include <string>
#include <vector>

#include "p2bench/metrics.hpp"
#include "p2bench/trainer.hpp"

namespace p2bench {

// One aggregated cell: a (method, activation, d_m) setting.
struct SettingKey {
    std::string method;
    std::string activation;
    double d_m = 0.0;

    bool operator<(const SettingKey& o) const {
        if (method != o.method) return method < o.method;
        if (activation != o.activation) return activation < o.activation;
        return d_m < o.d_m;
    }
};

struct SettingAggregate {
    // top-90% means over runs, keyed by column: "0", "1", "2", "M", "FIDmax"
    std::map<std::string, double> values;
    int n_runs = 0;
    // runs kept for plots: seed and generator of the best (lowest marginal
    // MMD) run
    std::uint64_t best_seed = 0;
    std::string best_generator_json;
    double best_marginal = 0.0;
};

struct ReportBundle {
    std::map<SettingKey, SettingAggregate> settings;
    // per activation plus "overall"; MMD columns only
    std::map<std::string, RankTable> rank_tables;
    std::vector<std::string> files_written;
};

// Loads every parseable RunResult under results_dir (sorted by name),
// aggregates with the given top fraction, writes CSV tables and per-setting
// histogram SVGs under out_dir. Pure function of the directory contents.
ReportBundle build_report(const std::string& results_dir, const std::string& out_dir,
                          double top_fraction = 0.9);

// Aggregation without touching the filesystem, for tests and the acceptance
// suite.
ReportBundle aggregate_results(const std::vector<RunResult>& runs, double top_fraction = 0.9);

}  // namespace p2bench
