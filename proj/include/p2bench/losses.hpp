#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "p2bench/divergences.hpp"
#include "p2bench/models.hpp"
#include "p2bench/mog.hpp"

namespace p2bench {

enum class VariantKind {
    ProjGAN,
    DMGAN,
    ACGAN,
    TACGAN,
    FCGAN,
    P2GAN,
    P2GAN_D,
    P2GAN_S,
    P2GAN_SP,
    P2GAN_A,
    P2GAN_AP,
    P2GAN_S_ALT,
    P2GAN_SP_ALT,
    P2GAN_A_ALT,
    P2GAN_AP_ALT,
};

constexpr VariantKind kAllVariantKinds[] = {
    VariantKind::ProjGAN,      VariantKind::DMGAN,        VariantKind::ACGAN,
    VariantKind::TACGAN,       VariantKind::FCGAN,        VariantKind::P2GAN,
    VariantKind::P2GAN_D,      VariantKind::P2GAN_S,      VariantKind::P2GAN_SP,
    VariantKind::P2GAN_A,      VariantKind::P2GAN_AP,     VariantKind::P2GAN_S_ALT,
    VariantKind::P2GAN_SP_ALT, VariantKind::P2GAN_A_ALT,  VariantKind::P2GAN_AP_ALT,
};

struct LossVariant {
    VariantKind kind = VariantKind::P2GAN;
    ActivationKind activation = ActivationKind::SoftplusBCE;
    std::optional<FDivergenceKind> fdiv;  // FCGAN only
    std::optional<double> decay_T;        // P2GAN_D only

    void validate() const;
    // canonical string form: "p2gan", "fcgan:reverse-kl", "p2gan-d:200", ...
    std::string name() const;
};

// Parses the CLI variant grammar. Throws std::invalid_argument with the list
// of accepted forms on failure. Activation is not part of the string.
LossVariant parse_variant(const std::string& s);
std::vector<std::string> variant_grammar();

std::string activation_name(ActivationKind a);
bool parse_activation(const std::string& s, ActivationKind& out);

struct Batch {
    LabeledBatch real;
    Tensor noise;                  // n x nz
    std::vector<int> fake_labels;  // n
    long step = 0;

    void validate() const;
};

struct LossReport {
    double d_total = 0.0;
    double g_total = 0.0;
    std::map<std::string, double> d_components;  // sums to d_total
    std::map<std::string, double> g_components;  // sums to g_total
    std::map<std::string, double> info;          // e.g. mean_lambda; not part of the sums
};

enum class Side { Real, Fake };

// A(t) per activation and batch side, as a loss on the discriminator.
double activation_loss(ActivationKind kind, double t, Side side);
Tape::Var activation_loss_graph(Tape& tape, ActivationKind kind, Tape::Var t, Side side);

// Per-sample generator adversarial term: softplus(-t) for BCE, -t for hinge.
Tape::Var generator_adv_graph(Tape& tape, ActivationKind kind, Tape::Var t);

// Mean cross-entropy -T^{head}(x_i, y_i) over a batch.
Tape::Var ce_loss_graph(Tape& tape, const DiscVars& d, Head head, Tape::Var x_col,
                        const std::vector<int>& y);

struct BuiltLoss {
    Tape::Var total;
    std::vector<std::pair<std::string, Tape::Var>> parts;  // addends of total
    std::map<std::string, double> info;
};

// Discriminator-step loss. Fake samples enter as constants; bind the
// discriminator trainable to optimize it.
BuiltLoss build_d_loss(Tape& tape, const DiscVars& disc, const LossVariant& variant,
                       const std::vector<double>& real_x, const std::vector<int>& real_y,
                       const std::vector<double>& fake_x, const std::vector<int>& fake_y,
                       long step);

// Generator-step loss. The discriminator binding should be frozen
// (non-trainable); the sample path stays differentiable.
BuiltLoss build_g_loss(Tape& tape, const GenVars& gen, const DiscVars& disc,
                       const LossVariant& variant, const Tensor& noise,
                       const std::vector<int>& fake_y, long step);

// Evaluates both losses on one batch without touching any parameters.
LossReport evaluate_losses(const GeneratorParams& gen, const DiscriminatorParams& disc,
                           const Batch& batch, const LossVariant& variant);

}  // namespace p2bench
