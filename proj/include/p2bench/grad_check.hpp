#pragma once

#include <functional>
#include <string>
#include <vector>

#include "p2bench/tape.hpp"

namespace p2bench::ad {

// Builds a scalar graph over the given parameter tensors. The builder must
// push one trainable leaf per parameter (reading its current values) into
// `leaves`, in order, and return the scalar output.
using GraphBuilder = std::function<Tape::Var(Tape&, std::vector<Tape::Var>&)>;

struct GradCheckReport {
    bool pass = false;
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::string worst;  // "param <p> elem <i>: analytic=..., fd=..."
};

// Compares reverse-mode gradients against central finite differences.
// Error metric is |a - fd| / max(1, |a|, |fd|), so it is relative for O(1)
// gradients and absolute for vanishing ones.
GradCheckReport grad_check(const std::vector<Tensor*>& params, const GraphBuilder& build,
                           double tolerance, double fd_step = 1e-5);

}  // namespace p2bench::ad
