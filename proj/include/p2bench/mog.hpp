#pragma once

#include <vector>

#include "p2bench/rng.hpp"

namespace p2bench {

// Ground-truth 1-D Gaussian mixture: component means/stds plus class priors.
struct MoGSpec {
    std::vector<double> means;   // strictly increasing
    std::vector<double> stds;    // positive
    std::vector<double> priors;  // nonnegative, sum to 1

    std::size_t num_classes() const { return means.size(); }
    void validate() const;
};

struct LabeledBatch {
    std::vector<double> xs;
    std::vector<int> ys;

    std::size_t size() const { return xs.size(); }
};

// Three components with stds {1, 2, 3}, means {0, d_m, 2 d_m}, uniform priors.
MoGSpec make_spec(double d_m);

LabeledBatch sample(const MoGSpec& spec, std::size_t n, Rng& rng);

// Gaussian density of component y at x.
double pdf(const MoGSpec& spec, double x, int y);

// sum_y prior_y * pdf(x, y)
double marginal_pdf(const MoGSpec& spec, double x);

}  // namespace p2bench
