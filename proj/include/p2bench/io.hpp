#pragma once

#include <string>

#include "p2bench/trainer.hpp"

namespace p2bench {

// Canonical JSON (sorted keys, round-trip doubles); identical configs give
// byte-identical text, which the digest and determinism checks rely on.
std::string train_config_to_json(const TrainConfig& config);

// Throws std::invalid_argument naming the offending field.
TrainConfig train_config_from_json(const std::string& text);

std::string run_result_to_json(const RunResult& result);
RunResult run_result_from_json(const std::string& text);

// FNV-1a of the canonical config JSON, as fixed-width hex.
std::string config_digest(const TrainConfig& config);

// "{method}_{activation}_{dm}_{seed}.json" with ':' made filename-safe
std::string run_filename(const std::string& variant, const std::string& activation, double d_m,
                         std::uint64_t seed);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

// serialized JSON with the named top-level field removed, for byte
// comparisons that ignore timing
std::string strip_json_field(const std::string& text, const std::string& field);

}  // namespace p2bench
