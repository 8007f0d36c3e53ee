#pragma once

#include <string>
#include <vector>

#include "p2bench/tape.hpp"

namespace p2bench {

enum class FDivergenceKind {
    ReverseKL,
    KL,
    PearsonChi2,
    SquaredHellinger,
    JensenShannon,
    GAN,
};

enum class ActivationKind {
    SoftplusBCE,  // A(t) = log(1 + e^t), the original GAN loss
    Hinge,
};

constexpr FDivergenceKind kAllFDivergences[] = {
    FDivergenceKind::ReverseKL,        FDivergenceKind::KL,
    FDivergenceKind::PearsonChi2,      FDivergenceKind::SquaredHellinger,
    FDivergenceKind::JensenShannon,    FDivergenceKind::GAN,
};

std::string fdiv_name(FDivergenceKind kind);
bool parse_fdiv(const std::string& s, FDivergenceKind& out);

// Generator function f(u) of the divergence, u > 0.
double f_generator(FDivergenceKind kind, double u);

// f(e^t) for a log-ratio t, clamped to |t| <= 30 before exponentiation.
double f_of_exp(FDivergenceKind kind, double t);
inline constexpr double kLogRatioClamp = 30.0;

// Same composition built on the tape, for use inside generator losses.
ad::Tape::Var f_of_exp_graph(ad::Tape& tape, FDivergenceKind kind, ad::Tape::Var t);

// Finite distribution over categories.
struct Categorical {
    std::vector<double> probs;

    // entries >= 0 and summing to 1 within 1e-12
    void validate() const;
};

Categorical random_categorical(std::size_t k, class Rng& rng, double floor = 0.0);

// sum p_i log(p_i / q_i), 0 log 0 = 0; throws if q_i = 0 while p_i > 0
double kl_categorical(const Categorical& p, const Categorical& q);

// 0.5 KL(p||m) + 0.5 KL(q||m), m = (p+q)/2; in [0, ln 2]
double jsd_categorical(const Categorical& p, const Categorical& q);

// 0.5 sum |p_i - q_i|; in [0, 1]
double tv_categorical(const Categorical& p, const Categorical& q);

// Squared Frechet distance between two 1-D Gaussians.
double frechet_1d(double mu1, double sigma1, double mu2, double sigma2);

}  // namespace p2bench
