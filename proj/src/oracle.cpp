#include "p2bench/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace p2bench {

void DiscreteJoint::validate() const {
    if (nx == 0 || ny == 0 || p.size() != nx * ny)
        throw std::invalid_argument("joint: bad dimensions");
    double s = 0.0;
    for (double v : p) {
        if (v < 0.0) throw std::invalid_argument("joint: negative entry");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-12)
        throw std::invalid_argument("joint: total mass " + std::to_string(s));
}

std::vector<double> DiscreteJoint::x_marginal() const {
    std::vector<double> m(nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) m[x] += at(x, y);
    return m;
}

void ConditionalTable::validate() const {
    for (const Categorical& row : rows)
        if (!row.probs.empty()) row.validate();
}

PosteriorResult posterior_from_joint(const DiscreteJoint& joint) {
    joint.validate();
    PosteriorResult result;
    result.x_marginal = joint.x_marginal();
    result.posterior.rows.resize(joint.nx);
    result.defined.assign(joint.nx, false);
    bool any = false;
    for (std::size_t x = 0; x < joint.nx; ++x) {
        const double mx = result.x_marginal[x];
        if (mx <= 0.0) continue;  // undefined row, left empty
        any = true;
        result.defined[x] = true;
        Categorical& row = result.posterior.rows[x];
        row.probs.resize(joint.ny);
        for (std::size_t y = 0; y < joint.ny; ++y) row.probs[y] = joint.at(x, y) / mx;
    }
    if (!any) throw std::invalid_argument("posterior_from_joint: all-zero joint");
    return result;
}

IdentityReport prop1_identity(const DiscreteJoint& P, const DiscreteJoint& Q,
                              const DiscreteJoint& D) {
    P.validate();
    Q.validate();
    if (D.nx != P.nx || D.ny != P.ny || Q.nx != P.nx || Q.ny != P.ny)
        throw std::invalid_argument("prop1: table dimensions differ");
    for (double d : D.p)
        if (d <= 0.0 || d >= 1.0) throw std::invalid_argument("prop1: D values must be in (0,1)");

    // class marginals
    std::vector<double> py(P.ny, 0.0), qy(P.ny, 0.0);
    for (std::size_t x = 0; x < P.nx; ++x)
        for (std::size_t y = 0; y < P.ny; ++y) {
            py[y] += P.at(x, y);
            qy[y] += Q.at(x, y);
        }
    for (double v : py)
        if (v <= 0.0) throw std::invalid_argument("prop1: zero class prior under P");

    IdentityReport r;
    for (std::size_t x = 0; x < P.nx; ++x)
        for (std::size_t y = 0; y < P.ny; ++y)
            r.lhs += P.at(x, y) * std::log(D.at(x, y)) + Q.at(x, y) * std::log1p(-D.at(x, y));

    // rhs groups by class: E_{P_Y} { E_{P_X|Y} log D + (Q_y/P_y) E_{Q_X|Y} log(1-D) }
    for (std::size_t y = 0; y < P.ny; ++y) {
        double e_p = 0.0, e_q = 0.0;
        for (std::size_t x = 0; x < P.nx; ++x) {
            if (P.at(x, y) > 0.0) e_p += P.at(x, y) / py[y] * std::log(D.at(x, y));
            if (Q.at(x, y) > 0.0 && qy[y] > 0.0)
                e_q += Q.at(x, y) / qy[y] * std::log1p(-D.at(x, y));
        }
        r.rhs += py[y] * (e_p + qy[y] / py[y] * e_q);
    }
    r.abs_diff = std::abs(r.lhs - r.rhs);
    return r;
}

IdentityReport prop2_identity(const ConditionalTable& p_post, const ConditionalTable& q_post,
                              const std::vector<double>& q_marginal) {
    if (p_post.size() != q_post.size() || q_marginal.size() != p_post.size())
        throw std::invalid_argument("prop2: table sizes differ");
    IdentityReport r;
    // lhs: E over the joint Q_XY of log Q(y|x) - log P(y|x), with the optimal
    // classifiers standing in for the posteriors
    for (std::size_t x = 0; x < p_post.size(); ++x) {
        if (q_marginal[x] == 0.0) continue;
        const Categorical& qrow = q_post.rows[x];
        const Categorical& prow = p_post.rows[x];
        if (qrow.probs.size() != prow.probs.size())
            throw std::invalid_argument("prop2: row width mismatch");
        for (std::size_t y = 0; y < qrow.probs.size(); ++y) {
            if (qrow.probs[y] == 0.0) continue;
            if (prow.probs[y] == 0.0)
                throw std::invalid_argument("prop2: support violation");
            r.lhs += q_marginal[x] * qrow.probs[y] *
                     (std::log(qrow.probs[y]) - std::log(prow.probs[y]));
        }
    }
    // rhs: per-x reverse KL averaged under Q_X
    for (std::size_t x = 0; x < p_post.size(); ++x) {
        if (q_marginal[x] == 0.0) continue;
        r.rhs += q_marginal[x] * kl_categorical(q_post.rows[x], p_post.rows[x]);
    }
    r.abs_diff = std::abs(r.lhs - r.rhs);
    return r;
}

namespace {

double expectation_kl(const ConditionalTable& a, const ConditionalTable& b,
                      const std::vector<double>& weight) {
    double s = 0.0;
    for (std::size_t x = 0; x < a.size(); ++x) {
        if (weight[x] == 0.0) continue;
        s += weight[x] * kl_categorical(a.rows[x], b.rows[x]);
    }
    return s;
}

Categorical flatten(const DiscreteJoint& j) {
    Categorical c;
    c.probs = j.p;
    return c;
}

}  // namespace

BoundReport theorem1_bound(const DiscreteJoint& P, const DiscreteJoint& Q,
                           const ConditionalTable& q_p, const ConditionalTable& q_q) {
    P.validate();
    Q.validate();
    if (Q.nx != P.nx || Q.ny != P.ny || q_p.size() != P.nx || q_q.size() != P.nx)
        throw std::invalid_argument("theorem1: table dimensions differ");

    BoundReport r;
    r.c1 = static_cast<double>(P.nx) / 2.0;
    r.c2 = 1.0;

    r.lhs = jsd_categorical(flatten(P), flatten(Q));

    const PosteriorResult pp = posterior_from_joint(P);
    const PosteriorResult qq = posterior_from_joint(Q);

    Categorical px{pp.x_marginal}, qx{qq.x_marginal};
    const double marginal_jsd = jsd_categorical(px, qx);

    const double kl_p = expectation_kl(pp.posterior, q_p, pp.x_marginal);
    const double kl_q = expectation_kl(qq.posterior, q_q, qq.x_marginal);
    // classifier gap, averaged where fake data lives
    double kl_pq = 0.0;
    for (std::size_t x = 0; x < P.nx; ++x) {
        if (qq.x_marginal[x] == 0.0) continue;
        kl_pq += qq.x_marginal[x] * kl_categorical(q_q.rows[x], q_p.rows[x]);
    }

    r.rhs = 2.0 * r.c1 * std::sqrt(2.0 * marginal_jsd) + r.c2 * std::sqrt(2.0 * kl_p) +
            r.c2 * std::sqrt(2.0 * kl_q) + r.c2 * std::sqrt(2.0 * kl_pq);
    r.margin = r.rhs - r.lhs;
    return r;
}

PinskerReport pinsker_sandwich(const Categorical& p, const Categorical& q) {
    PinskerReport r;
    r.tv = tv_categorical(p, q);
    r.kl = kl_categorical(p, q);
    r.jsd = jsd_categorical(p, q);
    const double slack = 1e-12;
    r.pinsker_holds = r.tv <= std::sqrt(r.kl / 2.0) + slack;
    r.sandwich_lower = 0.5 * r.tv * r.tv <= r.jsd + slack;
    r.sandwich_upper = r.jsd <= 2.0 * r.tv + slack;
    return r;
}

DiscreteJoint random_joint(std::size_t nx, std::size_t ny, Rng& rng, double floor) {
    DiscreteJoint j;
    j.nx = nx;
    j.ny = ny;
    j.p.resize(nx * ny);
    double s = 0.0;
    for (double& v : j.p) {
        v = floor + rng.uniform01();
        s += v;
    }
    for (double& v : j.p) v /= s;
    // renormalize exactly enough for the 1e-12 mass invariant
    double s2 = 0.0;
    for (double v : j.p) s2 += v;
    j.p[0] += 1.0 - s2;
    return j;
}

ConditionalTable random_conditional(std::size_t nx, std::size_t ny, Rng& rng, double floor) {
    ConditionalTable t;
    t.rows.reserve(nx);
    for (std::size_t x = 0; x < nx; ++x) t.rows.push_back(random_categorical(ny, rng, floor));
    return t;
}

}  // namespace p2bench
