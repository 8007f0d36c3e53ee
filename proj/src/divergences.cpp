#include "p2bench/divergences.hpp"

#include <cmath>
#include <stdexcept>

#include "p2bench/rng.hpp"

namespace p2bench {

namespace {
constexpr double kLn2 = 0.6931471805599453094172321214581766;
}

std::string fdiv_name(FDivergenceKind kind) {
    switch (kind) {
        case FDivergenceKind::ReverseKL: return "reverse-kl";
        case FDivergenceKind::KL: return "kl";
        case FDivergenceKind::PearsonChi2: return "pearson-chi2";
        case FDivergenceKind::SquaredHellinger: return "squared-hellinger";
        case FDivergenceKind::JensenShannon: return "jensen-shannon";
        case FDivergenceKind::GAN: return "gan";
    }
    return "?";
}

bool parse_fdiv(const std::string& s, FDivergenceKind& out) {
    for (FDivergenceKind k : kAllFDivergences) {
        if (s == fdiv_name(k)) {
            out = k;
            return true;
        }
    }
    return false;
}

double f_generator(FDivergenceKind kind, double u) {
    if (u <= 0.0) throw std::invalid_argument("f_generator: u must be positive");
    switch (kind) {
        case FDivergenceKind::ReverseKL:
            return -std::log(u);
        case FDivergenceKind::KL:
            return u * std::log(u);
        case FDivergenceKind::PearsonChi2:
            return (u - 1.0) * (u - 1.0);
        case FDivergenceKind::SquaredHellinger: {
            const double d = std::sqrt(u) - 1.0;
            return d * d;
        }
        case FDivergenceKind::JensenShannon:
            return -(u + 1.0) * std::log((1.0 + u) / 2.0) + u * std::log(u);
        case FDivergenceKind::GAN:
            return u * std::log(u) - (u + 1.0) * std::log(u + 1.0);
    }
    throw std::invalid_argument("f_generator: unknown kind");
}

double f_of_exp(FDivergenceKind kind, double t) {
    t = std::min(kLogRatioClamp, std::max(-kLogRatioClamp, t));
    switch (kind) {
        case FDivergenceKind::ReverseKL:
            return -t;
        case FDivergenceKind::KL:
            return t * std::exp(t);
        case FDivergenceKind::PearsonChi2: {
            const double d = std::expm1(t);
            return d * d;
        }
        case FDivergenceKind::SquaredHellinger: {
            const double d = std::expm1(t / 2.0);
            return d * d;
        }
        case FDivergenceKind::JensenShannon:
            // log((1+e^t)/2) = softplus(t) - ln 2
            return -(std::exp(t) + 1.0) * (ad::stable_softplus(t) - kLn2) + t * std::exp(t);
        case FDivergenceKind::GAN:
            return t * std::exp(t) - (std::exp(t) + 1.0) * ad::stable_softplus(t);
    }
    throw std::invalid_argument("f_of_exp: unknown kind");
}

ad::Tape::Var f_of_exp_graph(ad::Tape& tape, FDivergenceKind kind, ad::Tape::Var t_raw) {
    using Var = ad::Tape::Var;
    Var t = tape.clamp(t_raw, -kLogRatioClamp, kLogRatioClamp);
    switch (kind) {
        case FDivergenceKind::ReverseKL:
            return tape.neg(t);
        case FDivergenceKind::KL:
            return tape.mul(t, tape.exp(t));
        case FDivergenceKind::PearsonChi2: {
            Var d = tape.add_const(tape.exp(t), -1.0);
            return tape.mul(d, d);
        }
        case FDivergenceKind::SquaredHellinger: {
            Var d = tape.add_const(tape.exp(tape.scale(t, 0.5)), -1.0);
            return tape.mul(d, d);
        }
        case FDivergenceKind::JensenShannon: {
            Var et = tape.exp(t);
            Var lg = tape.add_const(tape.softplus(t), -kLn2);
            return tape.add(tape.neg(tape.mul(tape.add_const(et, 1.0), lg)), tape.mul(t, et));
        }
        case FDivergenceKind::GAN: {
            Var et = tape.exp(t);
            return tape.sub(tape.mul(t, et), tape.mul(tape.add_const(et, 1.0), tape.softplus(t)));
        }
    }
    throw std::invalid_argument("f_of_exp_graph: unknown kind");
}

void Categorical::validate() const {
    double s = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("categorical: negative probability");
        s += p;
    }
    if (std::abs(s - 1.0) > 1e-12)
        throw std::invalid_argument("categorical: probabilities sum to " + std::to_string(s));
}

Categorical random_categorical(std::size_t k, Rng& rng, double floor) {
    Categorical c;
    c.probs.resize(k);
    double s = 0.0;
    for (double& p : c.probs) {
        p = floor + rng.uniform01();
        s += p;
    }
    for (double& p : c.probs) p /= s;
    return c;
}

double kl_categorical(const Categorical& p, const Categorical& q) {
    if (p.probs.size() != q.probs.size())
        throw std::invalid_argument("kl_categorical: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        if (p.probs[i] == 0.0) continue;
        if (q.probs[i] == 0.0)
            throw std::invalid_argument("kl_categorical: support violation at index " +
                                        std::to_string(i));
        s += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
    }
    return s;
}

double jsd_categorical(const Categorical& p, const Categorical& q) {
    if (p.probs.size() != q.probs.size())
        throw std::invalid_argument("jsd_categorical: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        const double m = 0.5 * (p.probs[i] + q.probs[i]);
        if (p.probs[i] > 0.0) s += 0.5 * p.probs[i] * std::log(p.probs[i] / m);
        if (q.probs[i] > 0.0) s += 0.5 * q.probs[i] * std::log(q.probs[i] / m);
    }
    return s;
}

double tv_categorical(const Categorical& p, const Categorical& q) {
    if (p.probs.size() != q.probs.size())
        throw std::invalid_argument("tv_categorical: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) s += std::abs(p.probs[i] - q.probs[i]);
    return 0.5 * s;
}

double frechet_1d(double mu1, double sigma1, double mu2, double sigma2) {
    if (sigma1 < 0.0 || sigma2 < 0.0) throw std::invalid_argument("frechet_1d: negative sigma");
    const double dm = mu1 - mu2;
    const double ds = sigma1 - sigma2;
    return dm * dm + ds * ds;
}

}  // namespace p2bench
