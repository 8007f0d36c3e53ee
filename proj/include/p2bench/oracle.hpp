#pragma once

#include <optional>
#include <vector>

#include "p2bench/divergences.hpp"
#include "p2bench/rng.hpp"

namespace p2bench {

// Exact finite joint distribution over X x Y.
struct DiscreteJoint {
    std::size_t nx = 0, ny = 0;
    std::vector<double> p;  // row-major, p[x * ny + y]

    double& at(std::size_t x, std::size_t y) { return p[x * ny + y]; }
    double at(std::size_t x, std::size_t y) const { return p[x * ny + y]; }

    // entries >= 0, total 1 within 1e-12
    void validate() const;
    std::vector<double> x_marginal() const;
};

struct ConditionalTable {
    std::vector<Categorical> rows;  // one per x; empty slot = undefined

    std::size_t size() const { return rows.size(); }
    void validate() const;
};

struct PosteriorResult {
    std::vector<double> x_marginal;
    ConditionalTable posterior;
    std::vector<bool> defined;  // false where the x-marginal is zero
};

// Bayes posterior per x; rows with zero marginal are flagged undefined.
PosteriorResult posterior_from_joint(const DiscreteJoint& joint);

struct IdentityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
};

// Value-function rearrangement of a class-conditional GAN into per-class
// objectives weighted by Q_y / P_y. D holds tabular values in (0, 1).
IdentityReport prop1_identity(const DiscreteJoint& P, const DiscreteJoint& Q,
                              const DiscreteJoint& D);

// Difference of the two optimal cross-entropy losses on fake data equals the
// Q_X-averaged reverse KL between the conditionals.
IdentityReport prop2_identity(const ConditionalTable& p_post, const ConditionalTable& q_post,
                              const std::vector<double>& q_marginal);

struct BoundReport {
    double lhs = 0.0;     // JSD(P_XY, Q_XY)
    double rhs = 0.0;
    double margin = 0.0;  // rhs - lhs
    double c1 = 0.0, c2 = 0.0;
};

// Upper bound on the joint JSD via the marginal JSD plus three conditional
// KL terms (classifier estimates Qp, Qq). Counting measure, so c1 = |X|/2
// and c2 = 1. The KL terms are expectation-form: the P-side conditional is
// averaged under P_X, the other two under Q_X.
BoundReport theorem1_bound(const DiscreteJoint& P, const DiscreteJoint& Q,
                           const ConditionalTable& q_p, const ConditionalTable& q_q);

struct PinskerReport {
    double tv = 0.0;
    double kl = 0.0;
    double jsd = 0.0;
    bool pinsker_holds = false;    // tv <= sqrt(kl / 2)
    bool sandwich_lower = false;   // tv^2 / 2 <= jsd
    bool sandwich_upper = false;   // jsd <= 2 tv
    bool all() const { return pinsker_holds && sandwich_lower && sandwich_upper; }
};

PinskerReport pinsker_sandwich(const Categorical& p, const Categorical& q);

// Random full-support instances for the property sweeps.
DiscreteJoint random_joint(std::size_t nx, std::size_t ny, Rng& rng, double floor = 0.01);
ConditionalTable random_conditional(std::size_t nx, std::size_t ny, Rng& rng, double floor = 0.01);

}  // namespace p2bench
