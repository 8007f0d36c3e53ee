#include "p2bench/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace p2bench {

using nlohmann::json;

namespace {

json metrics_to_json(const MetricBundle& m) {
    json j;
    j["mmd_class"] = m.mmd_class;
    j["mmd_marginal"] = m.mmd_marginal;
    j["fid_class"] = m.fid_class;
    j["fid_max"] = m.fid_max;
    j["degenerate_fake"] = m.degenerate_fake;
    return j;
}

MetricBundle metrics_from_json(const json& j) {
    MetricBundle m;
    m.mmd_class = j.at("mmd_class").get<std::array<double, 3>>();
    m.mmd_marginal = j.at("mmd_marginal").get<double>();
    m.fid_class = j.at("fid_class").get<std::array<double, 3>>();
    m.fid_max = j.at("fid_max").get<double>();
    m.degenerate_fake = j.at("degenerate_fake").get<bool>();
    return m;
}

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw std::invalid_argument("config field '" + field + "': " + why);
}

template <typename T>
void read_field(const json& j, const std::string& field, T& out) {
    if (!j.contains(field)) return;
    try {
        out = j.at(field).get<T>();
    } catch (const json::exception& e) {
        bad_field(field, e.what());
    }
}

constexpr const char* kTrainFields[] = {
    "variant",    "activation",  "d_m",          "batch_size", "iterations",
    "d_steps_per_g", "eval_every", "eval_samples", "seed",       "optimizer",
    "kernel",
};

constexpr const char* kOptimizerFields[] = {"lr", "beta1", "beta2", "eps"};

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok) bad_field(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
    }
}

}  // namespace

std::string train_config_to_json(const TrainConfig& config) {
    json j;
    j["variant"] = config.variant.name();
    j["activation"] = activation_name(config.variant.activation);
    j["d_m"] = config.d_m;
    j["batch_size"] = config.batch_size;
    j["iterations"] = config.iterations;
    j["d_steps_per_g"] = config.d_steps_per_g;
    j["eval_every"] = config.eval_every;
    j["eval_samples"] = config.eval_samples;
    j["seed"] = config.seed;
    j["optimizer"] = {{"lr", config.optimizer.lr},
                      {"beta1", config.optimizer.beta1},
                      {"beta2", config.optimizer.beta2},
                      {"eps", config.optimizer.eps}};
    j["kernel"] = {{"bandwidths", config.kernel.bandwidths}};
    return j.dump(2) + "\n";
}

TrainConfig train_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    reject_unknown(j, {kTrainFields[0], kTrainFields[1], kTrainFields[2], kTrainFields[3],
                       kTrainFields[4], kTrainFields[5], kTrainFields[6], kTrainFields[7],
                       kTrainFields[8], kTrainFields[9], kTrainFields[10]},
                   "");

    TrainConfig config;
    if (!j.contains("variant")) bad_field("variant", "required");
    std::string variant_str;
    read_field(j, "variant", variant_str);
    try {
        config.variant = parse_variant(variant_str);
    } catch (const std::invalid_argument& e) {
        bad_field("variant", e.what());
    }
    std::string act = "bce";
    read_field(j, "activation", act);
    if (!parse_activation(act, config.variant.activation))
        bad_field("activation", "expected 'bce' or 'hinge'");

    read_field(j, "d_m", config.d_m);
    read_field(j, "batch_size", config.batch_size);
    read_field(j, "iterations", config.iterations);
    read_field(j, "d_steps_per_g", config.d_steps_per_g);
    int eval_every = 0;
    if (j.contains("eval_every")) {
        read_field(j, "eval_every", eval_every);
        config.eval_every = eval_every;
    } else {
        config.eval_every = std::min(config.eval_every, config.iterations);
    }
    read_field(j, "eval_samples", config.eval_samples);
    read_field(j, "seed", config.seed);
    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        reject_unknown(o, {kOptimizerFields[0], kOptimizerFields[1], kOptimizerFields[2],
                           kOptimizerFields[3]},
                       "optimizer");
        read_field(o, "lr", config.optimizer.lr);
        read_field(o, "beta1", config.optimizer.beta1);
        read_field(o, "beta2", config.optimizer.beta2);
        read_field(o, "eps", config.optimizer.eps);
    }
    if (j.contains("kernel")) {
        const json& k = j.at("kernel");
        reject_unknown(k, {"bandwidths"}, "kernel");
        read_field(k, "bandwidths", config.kernel.bandwidths);
    }
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(e.what());
    }
    return config;
}

std::string run_result_to_json(const RunResult& result) {
    json j;
    j["variant"] = result.variant;
    j["activation"] = result.activation;
    j["d_m"] = result.d_m;
    j["seed"] = result.seed;
    j["config_digest"] = result.config_digest;
    j["initial"] = metrics_to_json(result.initial);
    j["final"] = metrics_to_json(result.finals);
    json hist = json::array();
    for (const HistoryEntry& h : result.history) {
        json e;
        e["iteration"] = h.iteration;
        e["metrics"] = metrics_to_json(h.metrics);
        if (h.has_lambda) e["lambda"] = h.lambda;
        hist.push_back(std::move(e));
    }
    j["history"] = std::move(hist);
    j["generator_params"] = json::parse(result.generator_json);
    j["wall_clock_seconds"] = result.wall_clock_seconds;
    return j.dump(2) + "\n";
}

RunResult run_result_from_json(const std::string& text) {
    json j = json::parse(text);
    RunResult r;
    r.variant = j.at("variant").get<std::string>();
    r.activation = j.at("activation").get<std::string>();
    r.d_m = j.at("d_m").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.initial = metrics_from_json(j.at("initial"));
    r.finals = metrics_from_json(j.at("final"));
    for (const json& e : j.at("history")) {
        HistoryEntry h;
        h.iteration = e.at("iteration").get<int>();
        h.metrics = metrics_from_json(e.at("metrics"));
        if (e.contains("lambda")) {
            h.lambda = e.at("lambda").get<double>();
            h.has_lambda = true;
        }
        r.history.push_back(std::move(h));
    }
    r.generator_json = j.at("generator_params").dump();
    r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    return r;
}

std::string config_digest(const TrainConfig& config) {
    const std::string text = train_config_to_json(config);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string run_filename(const std::string& variant, const std::string& activation, double d_m,
                         std::uint64_t seed) {
    std::string v = variant;
    for (char& c : v)
        if (c == ':' || c == '/') c = '-';
    std::ostringstream os;
    os << v << "_" << activation << "_" << d_m << "_" << seed << ".json";
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

std::string strip_json_field(const std::string& text, const std::string& field) {
    json j = json::parse(text);
    j.erase(field);
    return j.dump(2) + "\n";
}

}  // namespace p2bench
