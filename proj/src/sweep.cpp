#include "p2bench/sweep.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "p2bench/io.hpp"

namespace p2bench {

using nlohmann::json;

void SweepConfig::validate() const {
    if (methods.empty()) throw std::invalid_argument("sweep field 'methods': must be non-empty");
    for (const std::string& m : methods) parse_variant(m);  // throws with the grammar
    if (activations.empty())
        throw std::invalid_argument("sweep field 'activations': must be non-empty");
    for (const std::string& a : activations) {
        ActivationKind k;
        if (!parse_activation(a, k))
            throw std::invalid_argument("sweep field 'activations': expected 'bce' or 'hinge'");
    }
    if (d_m_values.empty())
        throw std::invalid_argument("sweep field 'd_m_values': must be non-empty");
    for (double d : d_m_values)
        if (d <= 0.0) throw std::invalid_argument("sweep field 'd_m_values': must be positive");
    if (runs_per_setting < 1)
        throw std::invalid_argument("sweep field 'runs_per_setting': must be >= 1");
    if (parallelism < 1) throw std::invalid_argument("sweep field 'parallelism': must be >= 1");
    if (output_dir.empty()) throw std::invalid_argument("sweep field 'output_dir': must be set");
}

SweepConfig sweep_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("sweep config is not valid JSON: ") + e.what());
    }
    SweepConfig config;
    auto get = [&j](const char* field, auto& out) {
        if (!j.contains(field)) return;
        try {
            out = j.at(field).get<std::decay_t<decltype(out)>>();
        } catch (const json::exception& e) {
            throw std::invalid_argument("sweep field '" + std::string(field) + "': " + e.what());
        }
    };
    get("methods", config.methods);
    get("activations", config.activations);
    get("d_m_values", config.d_m_values);
    get("runs_per_setting", config.runs_per_setting);
    get("base_seed", config.base_seed);
    get("parallelism", config.parallelism);
    get("output_dir", config.output_dir);
    if (j.contains("train")) {
        json t = j.at("train");
        // per-run fields are supplied by the sweep grid
        t["variant"] = "p2gan";
        config.base = train_config_from_json(t.dump());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const char* known[] = {"methods",      "activations", "d_m_values",
                                      "runs_per_setting", "base_seed",   "parallelism",
                                      "output_dir",   "train"};
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok) throw std::invalid_argument("sweep field '" + it.key() + "': unknown field");
    }
    return config;
}

std::string sweep_config_to_json(const SweepConfig& config) {
    json j;
    j["methods"] = config.methods;
    j["activations"] = config.activations;
    j["d_m_values"] = config.d_m_values;
    j["runs_per_setting"] = config.runs_per_setting;
    j["base_seed"] = config.base_seed;
    j["parallelism"] = config.parallelism;
    j["output_dir"] = config.output_dir;
    j["train"] = json::parse(train_config_to_json(config.base));
    return j.dump(2) + "\n";
}

void apply_quick_preset(SweepConfig& config) {
    if (config.methods.empty())
        config.methods = {"projgan", "tacgan", "fcgan:reverse-kl", "p2gan"};
    if (config.activations.empty()) config.activations = {"bce"};
    config.d_m_values = {1.0, 3.0, 5.0};
    config.runs_per_setting = 10;
    config.base.iterations = 3000;
    config.base.eval_every = 3000;
}

int effective_parallelism(const SweepConfig& config) {
    if (const char* env = std::getenv("P2BENCH_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return config.parallelism;
}

SweepOutcome run_sweep(const SweepConfig& config) {
    config.validate();
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);

    struct Job {
        TrainConfig train;
        std::string path;
    };
    std::vector<Job> jobs;
    for (const std::string& method : config.methods)
        for (const std::string& act : config.activations)
            for (double d_m : config.d_m_values)
                for (int run = 0; run < config.runs_per_setting; ++run) {
                    TrainConfig t = config.base;
                    t.variant = parse_variant(method);
                    parse_activation(act, t.variant.activation);
                    t.d_m = d_m;
                    t.seed = config.base_seed + static_cast<std::uint64_t>(run);
                    t.validate();
                    Job job;
                    job.path = (fs::path(config.output_dir) /
                                run_filename(t.variant.name(), act, d_m, t.seed))
                                   .string();
                    job.train = std::move(t);
                    jobs.push_back(std::move(job));
                }

    SweepOutcome outcome;
    std::mutex mu;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            const std::string digest = config_digest(job.train);
            try {
                if (fs::exists(job.path)) {
                    const RunResult existing = run_result_from_json(read_file(job.path));
                    if (existing.config_digest == digest) {
                        std::lock_guard<std::mutex> lock(mu);
                        ++outcome.skipped;
                        continue;
                    }
                    throw std::runtime_error("existing result has different config digest");
                }
                const RunResult result = train_run(job.train);
                write_file_atomic(job.path, run_result_to_json(result));
                std::lock_guard<std::mutex> lock(mu);
                ++outcome.completed;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                ++outcome.failed;
                outcome.failures.push_back(job.path + ": " + e.what());
            }
        }
    };

    const int workers = std::max(1, effective_parallelism(config));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    return outcome;
}

}  // namespace p2bench
