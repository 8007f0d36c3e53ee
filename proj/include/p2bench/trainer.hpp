#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "p2bench/adam.hpp"
#include "p2bench/losses.hpp"
#include "p2bench/metrics.hpp"
#include "p2bench/mog.hpp"

namespace p2bench {

struct TrainConfig {
    LossVariant variant;
    double d_m = 2.0;
    int batch_size = 128;
    int iterations = 5000;
    int d_steps_per_g = 1;
    int eval_every = 500;
    int eval_samples = 3000;  // per class
    std::uint64_t seed = 0;
    ad::AdamConfig optimizer;  // shared by both networks
    KernelSpec kernel;

    void validate() const;
};

struct MetricBundle {
    std::array<double, 3> mmd_class{};
    double mmd_marginal = 0.0;
    std::array<double, 3> fid_class{};
    double fid_max = 0.0;
    bool degenerate_fake = false;  // some class collapsed to zero variance
};

struct HistoryEntry {
    int iteration = 0;
    MetricBundle metrics;
    double lambda = 0.0;  // gate value at this iteration, when the variant has one
    bool has_lambda = false;
};

struct RunResult {
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string variant;     // canonical variant string
    std::string activation;  // "bce" / "hinge"
    double d_m = 0.0;
    MetricBundle initial;  // untrained generator, iteration 0
    MetricBundle finals;   // equals the last history entry
    std::vector<HistoryEntry> history;
    std::string generator_json;  // final generator parameters
    double wall_clock_seconds = 0.0;
};

// Thrown when a loss goes non-finite; carries the diagnostic the spec asks
// for (iteration plus the last component values).
struct TrainAbort : std::runtime_error {
    explicit TrainAbort(const std::string& msg) : std::runtime_error(msg) {}
};

// Per-class and marginal MMD plus per-class Frechet fits against fresh real
// samples. n_per_class generated and real points per class.
MetricBundle evaluate(const GeneratorParams& gen, const MoGSpec& spec, int n_per_class, Rng& rng,
                      const KernelSpec& kernel = KernelSpec{});

RunResult train_run(const TrainConfig& config);

}  // namespace p2bench
