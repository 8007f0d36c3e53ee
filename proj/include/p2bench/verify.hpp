#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "p2bench/divergences.hpp"

namespace p2bench {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;  // worst-case margin / error, or the failure reason
};

// Full verification suite: oracle identities, f-table properties,
// Pinsker/sandwich sweeps, gradient checks, and the loss reduction
// identities. Deterministic for a fixed seed.
std::vector<CheckResult> run_verification(std::uint64_t seed = 20240901ULL);

bool all_passed(const std::vector<CheckResult>& results);

// Consistency of an f-of-exp implementation against the generator-function
// table; reusable so tests can hand it a corrupted implementation and watch
// it fail.
bool check_f_consistency(const std::function<double(FDivergenceKind, double)>& f_of_exp_impl,
                         double tolerance, double* max_err = nullptr);

}  // namespace p2bench
