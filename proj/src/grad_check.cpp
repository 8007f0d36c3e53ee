#include "p2bench/grad_check.hpp"

#include <cmath>

namespace p2bench::ad {

namespace {

double forward_only(const std::vector<Tensor*>& params, const GraphBuilder& build) {
    Tape tape;
    std::vector<Tape::Var> leaves;
    leaves.reserve(params.size());
    Tape::Var out = build(tape, leaves);
    return tape.scalar_value(out);
}

}  // namespace

GradCheckReport grad_check(const std::vector<Tensor*>& params, const GraphBuilder& build,
                           double tolerance, double fd_step) {
    GradCheckReport report;

    std::vector<Tensor> analytic;
    {
        Tape tape;
        std::vector<Tape::Var> leaves;
        leaves.reserve(params.size());
        Tape::Var out = build(tape, leaves);
        if (leaves.size() != params.size())
            throw TapeError("grad_check: builder bound a different number of leaves");
        tape.backward(out);
        for (Tape::Var leaf : leaves) analytic.push_back(tape.grad(leaf));
    }

    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double orig = t.data[i];
            t.data[i] = orig + fd_step;
            const double fplus = forward_only(params, build);
            t.data[i] = orig - fd_step;
            const double fminus = forward_only(params, build);
            t.data[i] = orig;

            const double fd = (fplus - fminus) / (2.0 * fd_step);
            const double a = analytic[p].data[i];
            const double denom = std::max({1.0, std::abs(a), std::abs(fd)});
            const double rel = std::abs(a - fd) / denom;
            ++report.checked;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst = "param " + std::to_string(p) + " elem " + std::to_string(i) +
                               ": analytic=" + std::to_string(a) + ", fd=" + std::to_string(fd);
            }
        }
    }
    report.pass = report.max_rel_err <= tolerance;
    return report;
}

}  // namespace p2bench::ad
