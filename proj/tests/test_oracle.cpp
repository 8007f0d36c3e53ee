#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "p2bench/oracle.hpp"

using namespace p2bench;

TEST_CASE("posterior_from_joint closed forms and reconstruction") {
    DiscreteJoint uniform;
    uniform.nx = 2;
    uniform.ny = 2;
    uniform.p = {0.25, 0.25, 0.25, 0.25};
    PosteriorResult r = posterior_from_joint(uniform);
    for (const Categorical& row : r.posterior.rows)
        for (double v : row.probs) CHECK(v == 0.5);

    DiscreteJoint diag;
    diag.nx = 2;
    diag.ny = 2;
    diag.p = {0.5, 0.0, 0.0, 0.5};
    r = posterior_from_joint(diag);
    CHECK(r.posterior.rows[0].probs == std::vector<double>{1.0, 0.0});
    CHECK(r.posterior.rows[1].probs == std::vector<double>{0.0, 1.0});

    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const DiscreteJoint j = random_joint(3, 4, rng);
        const PosteriorResult post = posterior_from_joint(j);
        for (std::size_t x = 0; x < 3; ++x)
            for (std::size_t y = 0; y < 4; ++y)
                CHECK(std::abs(post.x_marginal[x] * post.posterior.rows[x].probs[y] -
                               j.at(x, y)) <= 1e-14);
    }

    DiscreteJoint degenerate;
    degenerate.nx = 2;
    degenerate.ny = 1;
    degenerate.p = {1.0, 0.0};
    r = posterior_from_joint(degenerate);
    CHECK(r.defined[0]);
    CHECK_FALSE(r.defined[1]);
}

TEST_CASE("prop1: constant D = 1/2 gives -2 ln 2 on both sides") {
    Rng rng(2);
    const DiscreteJoint P = random_joint(3, 3, rng);
    const DiscreteJoint Q = random_joint(3, 3, rng);
    DiscreteJoint D;
    D.nx = 3;
    D.ny = 3;
    D.p.assign(9, 0.5);
    const IdentityReport r = prop1_identity(P, Q, D);
    CHECK(r.lhs == doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(r.rhs == doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(r.abs_diff <= 1e-14);
}

TEST_CASE("prop1: exact rearrangement on random instances") {
    Rng rng(3);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t nx = 2 + rng.uniform_int(3), ny = 2 + rng.uniform_int(3);
        const DiscreteJoint P = random_joint(nx, ny, rng);
        const DiscreteJoint Q = random_joint(nx, ny, rng);
        DiscreteJoint D;
        D.nx = nx;
        D.ny = ny;
        D.p.resize(nx * ny);
        for (double& v : D.p) v = 0.02 + 0.96 * rng.uniform01();
        worst = std::max(worst, prop1_identity(P, Q, D).abs_diff);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("prop1 rejects invalid discriminator tables") {
    Rng rng(4);
    const DiscreteJoint P = random_joint(2, 2, rng);
    DiscreteJoint D;
    D.nx = 2;
    D.ny = 2;
    D.p = {0.5, 0.5, 1.0, 0.5};  // 1.0 is outside (0,1)
    CHECK_THROWS_AS(prop1_identity(P, P, D), std::invalid_argument);
}

TEST_CASE("prop2: equal posteriors give zero") {
    Rng rng(5);
    const ConditionalTable t = random_conditional(3, 4, rng);
    const Categorical qx = random_categorical(3, rng, 0.01);
    const IdentityReport r = prop2_identity(t, t, qx.probs);
    CHECK(r.lhs == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.rhs == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("prop2: two-state hand-computed value") {
    ConditionalTable p, q;
    p.rows = {Categorical{{0.9, 0.1}}, Categorical{{0.2, 0.8}}};
    q.rows = {Categorical{{0.5, 0.5}}, Categorical{{0.5, 0.5}}};
    const IdentityReport r = prop2_identity(p, q, {0.5, 0.5});
    const double expected =
        0.5 * (0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1)) +
        0.5 * (0.5 * std::log(0.5 / 0.2) + 0.5 * std::log(0.5 / 0.8));
    CHECK(expected == doctest::Approx(0.3670).epsilon(1e-4));
    CHECK(r.lhs == doctest::Approx(expected).epsilon(1e-14));
    CHECK(r.rhs == doctest::Approx(expected).epsilon(1e-14));
    CHECK(r.abs_diff <= 1e-14);
}

TEST_CASE("prop2: exhaustive summation identity on random instances") {
    Rng rng(6);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t nx = 2 + rng.uniform_int(4), ny = 2 + rng.uniform_int(4);
        const ConditionalTable p = random_conditional(nx, ny, rng);
        const ConditionalTable q = random_conditional(nx, ny, rng);
        const Categorical qx = random_categorical(nx, rng, 0.01);
        worst = std::max(worst, prop2_identity(p, q, qx.probs).abs_diff);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("prop2 rejects support violations") {
    ConditionalTable p, q;
    p.rows = {Categorical{{1.0, 0.0}}};
    q.rows = {Categorical{{0.5, 0.5}}};
    CHECK_THROWS_AS(prop2_identity(p, q, {1.0}), std::invalid_argument);
}

TEST_CASE("theorem1: all terms vanish when P = Q with true posteriors") {
    DiscreteJoint P;
    P.nx = 2;
    P.ny = 3;
    P.p = {0.1, 0.2, 0.3, 0.05, 0.15, 0.2};
    const PosteriorResult post = posterior_from_joint(P);
    const BoundReport r = theorem1_bound(P, P, post.posterior, post.posterior);
    CHECK(r.lhs == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.rhs == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.c1 == 1.0);
    CHECK(r.c2 == 1.0);
}

TEST_CASE("theorem1: the bound holds on random instances") {
    Rng rng(7);
    double worst = 1e300;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t nx = 2 + rng.uniform_int(4), ny = 2 + rng.uniform_int(4);
        const DiscreteJoint P = random_joint(nx, ny, rng);
        const DiscreteJoint Q = random_joint(nx, ny, rng);
        const ConditionalTable qp = random_conditional(nx, ny, rng);
        const ConditionalTable qq = random_conditional(nx, ny, rng);
        worst = std::min(worst, theorem1_bound(P, Q, qp, qq).margin);
    }
    CHECK(worst >= -1e-10);
}

TEST_CASE("theorem1: disjoint marginals drive the bound through the JSD term") {
    DiscreteJoint A, B;
    A.nx = B.nx = 2;
    A.ny = B.ny = 2;
    A.p = {0.7, 0.3, 0.0, 0.0};
    B.p = {0.0, 0.0, 0.7, 0.3};
    ConditionalTable shared;
    shared.rows = {Categorical{{0.7, 0.3}}, Categorical{{0.7, 0.3}}};
    const BoundReport r = theorem1_bound(A, B, shared, shared);
    CHECK(r.lhs == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // conditional KL terms vanish; only the marginal term remains
    CHECK(r.rhs == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0))).epsilon(1e-12));
    CHECK(r.margin > 0.0);
}

TEST_CASE("pinsker_sandwich closed forms and sweep") {
    Categorical p{{1.0, 0.0}}, q{{0.5, 0.5}};
    PinskerReport r = pinsker_sandwich(p, q);
    CHECK(r.tv == 0.5);
    CHECK(r.kl == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(r.all());

    const PinskerReport same = pinsker_sandwich(q, q);
    CHECK(same.tv == 0.0);
    CHECK(same.kl == 0.0);
    CHECK(same.jsd == 0.0);
    CHECK(same.all());

    Rng rng(8);
    for (int trial = 0; trial < 1000; ++trial) {
        const Categorical a = random_categorical(4, rng, 0.005);
        const Categorical b = random_categorical(4, rng, 0.005);
        CHECK(pinsker_sandwich(a, b).all());
    }
}

TEST_CASE("joint validation catches bad tables") {
    DiscreteJoint j;
    j.nx = 2;
    j.ny = 2;
    j.p = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(j.validate(), std::invalid_argument);
    j.p = {0.5, 0.5, -0.5, 0.5};
    CHECK_THROWS_AS(j.validate(), std::invalid_argument);
}
