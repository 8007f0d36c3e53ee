#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "p2bench/trainer.hpp"

namespace p2bench {

struct SweepConfig {
    std::vector<std::string> methods;      // variant strings
    std::vector<std::string> activations;  // "bce" / "hinge"
    std::vector<double> d_m_values;
    int runs_per_setting = 100;
    std::uint64_t base_seed = 1;
    int parallelism = 1;
    std::string output_dir = "results";
    TrainConfig base;  // variant, d_m and seed are overwritten per run

    void validate() const;
};

SweepConfig sweep_config_from_json(const std::string& text);
std::string sweep_config_to_json(const SweepConfig& config);

// runs_per_setting 10, d_m {1,3,5}, 3000 iterations, metrics at the end only
void apply_quick_preset(SweepConfig& config);

struct SweepOutcome {
    int completed = 0;
    int skipped = 0;  // result file already present with matching digest
    int failed = 0;
    std::vector<std::string> failures;  // "file: reason"
};

// Runs the grid; per-run seeds are base_seed + run index within the setting.
// Existing result files with a matching config digest are skipped, so an
// interrupted sweep can be re-invoked. Worker count: P2BENCH_WORKERS env var
// overrides config.parallelism.
SweepOutcome run_sweep(const SweepConfig& config);

// Worker count resolution used by run_sweep, exposed for the CLI.
int effective_parallelism(const SweepConfig& config);

}  // namespace p2bench
