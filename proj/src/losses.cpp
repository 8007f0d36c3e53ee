#include "p2bench/losses.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace p2bench {

using Var = Tape::Var;

void LossVariant::validate() const {
    if (fdiv.has_value() != (kind == VariantKind::FCGAN))
        throw std::invalid_argument("loss variant: fdiv must be set exactly for fcgan");
    if (decay_T.has_value() != (kind == VariantKind::P2GAN_D))
        throw std::invalid_argument("loss variant: decay_T must be set exactly for p2gan-d");
    if (decay_T && *decay_T <= 0.0)
        throw std::invalid_argument("loss variant: decay_T must be positive");
}

namespace {

struct KindName {
    VariantKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {VariantKind::ProjGAN, "projgan"},
    {VariantKind::DMGAN, "dmgan"},
    {VariantKind::ACGAN, "acgan"},
    {VariantKind::TACGAN, "tacgan"},
    {VariantKind::FCGAN, "fcgan"},
    {VariantKind::P2GAN, "p2gan"},
    {VariantKind::P2GAN_D, "p2gan-d"},
    {VariantKind::P2GAN_S, "p2gan-s"},
    {VariantKind::P2GAN_SP, "p2gan-sp"},
    {VariantKind::P2GAN_A, "p2gan-a"},
    {VariantKind::P2GAN_AP, "p2gan-ap"},
    {VariantKind::P2GAN_S_ALT, "p2gan-s-alt"},
    {VariantKind::P2GAN_SP_ALT, "p2gan-sp-alt"},
    {VariantKind::P2GAN_A_ALT, "p2gan-a-alt"},
    {VariantKind::P2GAN_AP_ALT, "p2gan-ap-alt"},
};

std::string format_double_short(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::string LossVariant::name() const {
    std::string base;
    for (const KindName& kn : kKindNames)
        if (kn.kind == kind) base = kn.name;
    if (kind == VariantKind::FCGAN) return base + ":" + fdiv_name(*fdiv);
    if (kind == VariantKind::P2GAN_D) return base + ":" + format_double_short(*decay_T);
    return base;
}

std::vector<std::string> variant_grammar() {
    return {"projgan",      "dmgan",        "acgan",        "tacgan",
            "fcgan:<fdiv>", "p2gan",        "p2gan-d:<T>",  "p2gan-s",
            "p2gan-sp",     "p2gan-a",      "p2gan-ap",     "p2gan-s-alt",
            "p2gan-sp-alt", "p2gan-a-alt",  "p2gan-ap-alt"};
}

LossVariant parse_variant(const std::string& s) {
    std::string base = s;
    std::string arg;
    const std::size_t colon = s.find(':');
    if (colon != std::string::npos) {
        base = s.substr(0, colon);
        arg = s.substr(colon + 1);
    }
    LossVariant v;
    bool found = false;
    for (const KindName& kn : kKindNames) {
        if (base == kn.name) {
            v.kind = kn.kind;
            found = true;
            break;
        }
    }
    auto fail = [&s](const std::string& why) {
        std::string msg = "unknown loss variant '" + s + "'";
        if (!why.empty()) msg += " (" + why + ")";
        msg += "; valid variants:";
        for (const std::string& g : variant_grammar()) msg += " " + g;
        throw std::invalid_argument(msg);
    };
    if (!found) fail("");
    if (v.kind == VariantKind::FCGAN) {
        FDivergenceKind fk = FDivergenceKind::ReverseKL;
        if (!arg.empty() && !parse_fdiv(arg, fk)) {
            std::string names;
            for (FDivergenceKind k : kAllFDivergences) names += " " + fdiv_name(k);
            fail("f-divergences:" + names);
        }
        v.fdiv = fk;
    } else if (v.kind == VariantKind::P2GAN_D) {
        double T = 200.0;
        if (!arg.empty()) {
            try {
                std::size_t pos = 0;
                T = std::stod(arg, &pos);
                if (pos != arg.size()) fail("bad decay constant");
            } catch (const std::exception&) {
                fail("bad decay constant");
            }
        }
        if (T <= 0.0) fail("decay constant must be positive");
        v.decay_T = T;
    } else if (!arg.empty()) {
        fail("variant takes no argument");
    }
    v.validate();
    return v;
}

std::string activation_name(ActivationKind a) {
    return a == ActivationKind::SoftplusBCE ? "bce" : "hinge";
}

bool parse_activation(const std::string& s, ActivationKind& out) {
    if (s == "bce") {
        out = ActivationKind::SoftplusBCE;
        return true;
    }
    if (s == "hinge") {
        out = ActivationKind::Hinge;
        return true;
    }
    return false;
}

void Batch::validate() const {
    if (real.xs.size() != real.ys.size())
        throw std::invalid_argument("batch: real xs/ys length mismatch");
    if (noise.rows() != real.size() || fake_labels.size() != real.size())
        throw std::invalid_argument("batch: real/noise/fake_labels sizes differ");
}

double activation_loss(ActivationKind kind, double t, Side side) {
    if (kind == ActivationKind::SoftplusBCE)
        return side == Side::Real ? ad::stable_softplus(-t) : ad::stable_softplus(t);
    return side == Side::Real ? std::max(0.0, 1.0 - t) : std::max(0.0, 1.0 + t);
}

Var activation_loss_graph(Tape& tape, ActivationKind kind, Var t, Side side) {
    if (kind == ActivationKind::SoftplusBCE)
        return tape.softplus(side == Side::Real ? tape.neg(t) : t);
    // hinge margins: max(0, 1 - t) on real, max(0, 1 + t) on fake
    if (side == Side::Real) return tape.max_const(tape.neg(tape.add_const(t, -1.0)), 0.0);
    return tape.max_const(tape.add_const(t, 1.0), 0.0);
}

Var generator_adv_graph(Tape& tape, ActivationKind kind, Var t) {
    if (kind == ActivationKind::SoftplusBCE) return tape.softplus(tape.neg(t));
    return tape.neg(t);
}

namespace {

// per-sample -T^{head}(x_i, y_i), an (n x 1) column
Var ce_per_sample(Tape& tape, const DiscVars& d, Head head, Var phi, const std::vector<int>& y) {
    Var logpost = log_posterior_phi(tape, d, head, phi);
    return tape.neg(tape.take_per_row(logpost, y));
}

// log lambda computed from the pre-sigmoid gate: log sigmoid(z) = -softplus(-z)
Var log_gate_from_logit(Tape& tape, Var gate_logit) {
    return tape.neg(tape.softplus(tape.neg(gate_logit)));
}

struct PartsBuilder {
    Tape& tape;
    std::vector<std::pair<std::string, Var>> parts;

    void add(const std::string& name, Var v) { parts.push_back({name, v}); }

    Var total() const {
        Var t = parts.front().second;
        for (std::size_t i = 1; i < parts.size(); ++i) t = tape.add(t, parts[i].second);
        return t;
    }
};

double mean_of(const Tensor& t) {
    double s = 0.0;
    for (double x : t.data) s += x;
    return s / static_cast<double>(t.size());
}

}  // namespace

Var ce_loss_graph(Tape& tape, const DiscVars& d, Head head, Var x_col,
                  const std::vector<int>& y) {
    if (y.empty()) throw std::invalid_argument("ce_loss: empty batch");
    Var phi = embed(tape, d, x_col);
    return tape.mean_all(ce_per_sample(tape, d, head, phi, y));
}

BuiltLoss build_d_loss(Tape& tape, const DiscVars& disc, const LossVariant& variant,
                       const std::vector<double>& real_x, const std::vector<int>& real_y,
                       const std::vector<double>& fake_x, const std::vector<int>& fake_y,
                       long step) {
    variant.validate();
    if (real_x.empty() || fake_x.empty()) throw std::invalid_argument("d loss: empty batch");
    const ActivationKind act = variant.activation;

    Var xr = tape.constant(Tensor::col(real_x));
    Var xf = tape.constant(Tensor::col(fake_x));
    Var phi_r = embed(tape, disc, xr);
    Var phi_f = embed(tape, disc, xf);

    PartsBuilder pb{tape, {}};
    BuiltLoss out;

    auto adv_terms = [&](Var logit_r, Var logit_f) {
        pb.add("adv_real", tape.mean_all(activation_loss_graph(tape, act, logit_r, Side::Real)));
        pb.add("adv_fake", tape.mean_all(activation_loss_graph(tape, act, logit_f, Side::Fake)));
    };

    switch (variant.kind) {
        case VariantKind::ProjGAN:
            adv_terms(proj_logit_phi(tape, disc, phi_r, real_y),
                      proj_logit_phi(tape, disc, phi_f, fake_y));
            break;
        case VariantKind::DMGAN:
            adv_terms(proj_logit_phi(tape, disc, phi_r, real_y, /*with_psi=*/false),
                      proj_logit_phi(tape, disc, phi_f, fake_y, /*with_psi=*/false));
            break;
        case VariantKind::P2GAN:
            adv_terms(dual_proj_logit_phi(tape, disc, phi_r, real_y),
                      dual_proj_logit_phi(tape, disc, phi_f, fake_y));
            pb.add("ce_p_real", tape.mean_all(ce_per_sample(tape, disc, Head::P, phi_r, real_y)));
            pb.add("ce_q_fake", tape.mean_all(ce_per_sample(tape, disc, Head::Q, phi_f, fake_y)));
            break;
        case VariantKind::P2GAN_D: {
            const double lam = std::exp(-static_cast<double>(step) / *variant.decay_T);
            adv_terms(dual_proj_logit_phi(tape, disc, phi_r, real_y),
                      dual_proj_logit_phi(tape, disc, phi_f, fake_y));
            pb.add("ce_p_real",
                   tape.scale(tape.mean_all(ce_per_sample(tape, disc, Head::P, phi_r, real_y)),
                              lam));
            pb.add("ce_q_fake",
                   tape.scale(tape.mean_all(ce_per_sample(tape, disc, Head::Q, phi_f, fake_y)),
                              lam));
            out.info["mean_lambda"] = lam;
            break;
        }
        case VariantKind::P2GAN_S:
        case VariantKind::P2GAN_SP: {
            Var lam = tape.sigmoid(disc.gate_scalar);  // 1x1
            Var one_minus = tape.add_const(tape.neg(lam), 1.0);
            Var logit_r = dual_proj_logit_phi(tape, disc, phi_r, real_y);
            Var logit_f = dual_proj_logit_phi(tape, disc, phi_f, fake_y);
            pb.add("adv_real",
                   tape.mul(one_minus,
                            tape.mean_all(activation_loss_graph(tape, act, logit_r, Side::Real))));
            pb.add("adv_fake",
                   tape.mul(one_minus,
                            tape.mean_all(activation_loss_graph(tape, act, logit_f, Side::Fake))));
            pb.add("ce_p_real",
                   tape.mul(lam, tape.mean_all(ce_per_sample(tape, disc, Head::P, phi_r, real_y))));
            pb.add("ce_q_fake",
                   tape.mul(lam, tape.mean_all(ce_per_sample(tape, disc, Head::Q, phi_f, fake_y))));
            if (variant.kind == VariantKind::P2GAN_SP)
                pb.add("penalty", tape.scale(log_gate_from_logit(tape, disc.gate_scalar), -0.5));
            out.info["mean_lambda"] = tape.value(lam).data[0];
            break;
        }
        case VariantKind::P2GAN_A:
        case VariantKind::P2GAN_AP: {
            Var gl_r = gate_logit_phi(tape, disc, phi_r);
            Var gl_f = gate_logit_phi(tape, disc, phi_f);
            Var lam_r = tape.sigmoid(gl_r);
            Var lam_f = tape.sigmoid(gl_f);
            Var om_r = tape.add_const(tape.neg(lam_r), 1.0);
            Var om_f = tape.add_const(tape.neg(lam_f), 1.0);
            Var logit_r = dual_proj_logit_phi(tape, disc, phi_r, real_y);
            Var logit_f = dual_proj_logit_phi(tape, disc, phi_f, fake_y);
            pb.add("adv_real",
                   tape.mean_all(
                       tape.mul(om_r, activation_loss_graph(tape, act, logit_r, Side::Real))));
            pb.add("adv_fake",
                   tape.mean_all(
                       tape.mul(om_f, activation_loss_graph(tape, act, logit_f, Side::Fake))));
            pb.add("ce_p_real",
                   tape.mean_all(
                       tape.mul(lam_r, ce_per_sample(tape, disc, Head::P, phi_r, real_y))));
            pb.add("ce_q_fake",
                   tape.mean_all(
                       tape.mul(lam_f, ce_per_sample(tape, disc, Head::Q, phi_f, fake_y))));
            if (variant.kind == VariantKind::P2GAN_AP) {
                Var logs = tape.concat_rows(log_gate_from_logit(tape, gl_r),
                                            log_gate_from_logit(tape, gl_f));
                pb.add("penalty", tape.scale(tape.mean_all(logs), -0.5));
            }
            out.info["mean_lambda"] =
                0.5 * (mean_of(tape.value(lam_r)) + mean_of(tape.value(lam_f)));
            break;
        }
        case VariantKind::P2GAN_S_ALT:
        case VariantKind::P2GAN_SP_ALT: {
            Var lam = tape.sigmoid(disc.gate_scalar);
            adv_terms(dual_proj_logit_phi(tape, disc, phi_r, real_y),
                      dual_proj_logit_phi(tape, disc, phi_f, fake_y));
            pb.add("ce_p_real",
                   tape.mul(lam, tape.mean_all(ce_per_sample(tape, disc, Head::P, phi_r, real_y))));
            pb.add("ce_q_fake",
                   tape.mul(lam, tape.mean_all(ce_per_sample(tape, disc, Head::Q, phi_f, fake_y))));
            if (variant.kind == VariantKind::P2GAN_SP_ALT)
                pb.add("penalty", tape.scale(log_gate_from_logit(tape, disc.gate_scalar), -0.5));
            out.info["mean_lambda"] = tape.value(lam).data[0];
            break;
        }
        case VariantKind::P2GAN_A_ALT:
        case VariantKind::P2GAN_AP_ALT: {
            Var gl_r = gate_logit_phi(tape, disc, phi_r);
            Var gl_f = gate_logit_phi(tape, disc, phi_f);
            Var lam_r = tape.sigmoid(gl_r);
            Var lam_f = tape.sigmoid(gl_f);
            adv_terms(dual_proj_logit_phi(tape, disc, phi_r, real_y),
                      dual_proj_logit_phi(tape, disc, phi_f, fake_y));
            pb.add("ce_p_real",
                   tape.mean_all(
                       tape.mul(lam_r, ce_per_sample(tape, disc, Head::P, phi_r, real_y))));
            pb.add("ce_q_fake",
                   tape.mean_all(
                       tape.mul(lam_f, ce_per_sample(tape, disc, Head::Q, phi_f, fake_y))));
            if (variant.kind == VariantKind::P2GAN_AP_ALT) {
                Var logs = tape.concat_rows(log_gate_from_logit(tape, gl_r),
                                            log_gate_from_logit(tape, gl_f));
                pb.add("penalty", tape.scale(tape.mean_all(logs), -0.5));
            }
            out.info["mean_lambda"] =
                0.5 * (mean_of(tape.value(lam_r)) + mean_of(tape.value(lam_f)));
            break;
        }
        case VariantKind::FCGAN:
        case VariantKind::TACGAN:
            adv_terms(uncond_logit_phi(tape, disc, phi_r), uncond_logit_phi(tape, disc, phi_f));
            pb.add("ce_p_real", tape.mean_all(ce_per_sample(tape, disc, Head::P, phi_r, real_y)));
            pb.add("ce_q_fake", tape.mean_all(ce_per_sample(tape, disc, Head::Q, phi_f, fake_y)));
            if (variant.kind == VariantKind::TACGAN)
                pb.add("ce_p_fake",
                       tape.mean_all(ce_per_sample(tape, disc, Head::P, phi_f, fake_y)));
            break;
        case VariantKind::ACGAN:
            adv_terms(uncond_logit_phi(tape, disc, phi_r), uncond_logit_phi(tape, disc, phi_f));
            pb.add("ce_p_real", tape.mean_all(ce_per_sample(tape, disc, Head::P, phi_r, real_y)));
            pb.add("ce_p_fake", tape.mean_all(ce_per_sample(tape, disc, Head::P, phi_f, fake_y)));
            break;
    }

    out.total = pb.total();
    out.parts = std::move(pb.parts);
    return out;
}

BuiltLoss build_g_loss(Tape& tape, const GenVars& gen, const DiscVars& disc,
                       const LossVariant& variant, const Tensor& noise,
                       const std::vector<int>& fake_y, long step) {
    (void)step;
    variant.validate();
    if (fake_y.empty()) throw std::invalid_argument("g loss: empty batch");
    const ActivationKind act = variant.activation;

    Var fake = generate(tape, gen, tape.constant(noise), fake_y);
    Var phi_f = embed(tape, disc, fake);

    PartsBuilder pb{tape, {}};
    BuiltLoss out;

    switch (variant.kind) {
        case VariantKind::ProjGAN:
            pb.add("adv_gen",
                   tape.mean_all(generator_adv_graph(
                       tape, act, proj_logit_phi(tape, disc, phi_f, fake_y))));
            break;
        case VariantKind::DMGAN:
            pb.add("adv_gen",
                   tape.mean_all(generator_adv_graph(
                       tape, act,
                       proj_logit_phi(tape, disc, phi_f, fake_y, /*with_psi=*/false))));
            break;
        case VariantKind::P2GAN:
        case VariantKind::P2GAN_D:
        case VariantKind::P2GAN_S_ALT:
        case VariantKind::P2GAN_SP_ALT:
        case VariantKind::P2GAN_A_ALT:
        case VariantKind::P2GAN_AP_ALT:
            pb.add("adv_gen",
                   tape.mean_all(generator_adv_graph(
                       tape, act, dual_proj_logit_phi(tape, disc, phi_f, fake_y))));
            break;
        case VariantKind::P2GAN_S:
        case VariantKind::P2GAN_SP: {
            Var lam = tape.sigmoid(disc.gate_scalar);
            Var one_minus = tape.add_const(tape.neg(lam), 1.0);
            Var adv = tape.mean_all(generator_adv_graph(
                tape, act, dual_proj_logit_phi(tape, disc, phi_f, fake_y)));
            pb.add("adv_gen", tape.mul(one_minus, adv));
            out.info["mean_lambda"] = tape.value(lam).data[0];
            break;
        }
        case VariantKind::P2GAN_A:
        case VariantKind::P2GAN_AP: {
            // lambda evaluated on the differentiable sample path; gate head
            // parameters are frozen by the caller's discriminator binding
            Var lam_f = gate_phi(tape, disc, phi_f);
            Var om_f = tape.add_const(tape.neg(lam_f), 1.0);
            Var adv = generator_adv_graph(tape, act,
                                          dual_proj_logit_phi(tape, disc, phi_f, fake_y));
            pb.add("adv_gen", tape.mean_all(tape.mul(om_f, adv)));
            out.info["mean_lambda"] = mean_of(tape.value(lam_f));
            break;
        }
        case VariantKind::FCGAN:
        case VariantKind::TACGAN: {
            const FDivergenceKind fk =
                variant.kind == VariantKind::FCGAN ? *variant.fdiv : FDivergenceKind::ReverseKL;
            pb.add("adv_gen",
                   tape.mean_all(generator_adv_graph(tape, act,
                                                     uncond_logit_phi(tape, disc, phi_f))));
            Var tp = tape.take_per_row(log_posterior_phi(tape, disc, Head::P, phi_f), fake_y);
            Var tq = tape.take_per_row(log_posterior_phi(tape, disc, Head::Q, phi_f), fake_y);
            pb.add("f_term", tape.mean_all(f_of_exp_graph(tape, fk, tape.sub(tp, tq))));
            break;
        }
        case VariantKind::ACGAN: {
            pb.add("adv_gen",
                   tape.mean_all(generator_adv_graph(tape, act,
                                                     uncond_logit_phi(tape, disc, phi_f))));
            pb.add("ce_p_fake",
                   tape.mean_all(ce_per_sample(tape, disc, Head::P, phi_f, fake_y)));
            break;
        }
    }

    out.total = pb.total();
    out.parts = std::move(pb.parts);
    return out;
}

LossReport evaluate_losses(const GeneratorParams& gen, const DiscriminatorParams& disc,
                           const Batch& batch, const LossVariant& variant) {
    batch.validate();
    LossReport report;

    const std::vector<double> fake_x = generate_values(gen, batch.noise, batch.fake_labels);

    {
        Tape tape;
        DiscVars dv = bind(tape, disc, /*trainable=*/false);
        BuiltLoss d = build_d_loss(tape, dv, variant, batch.real.xs, batch.real.ys, fake_x,
                                   batch.fake_labels, batch.step);
        report.d_total = tape.scalar_value(d.total);
        for (const auto& [name, var] : d.parts) report.d_components[name] = tape.scalar_value(var);
        report.info = d.info;
    }
    {
        Tape tape;
        GenVars gv = bind(tape, gen, /*trainable=*/false);
        DiscVars dv = bind(tape, disc, /*trainable=*/false);
        BuiltLoss g =
            build_g_loss(tape, gv, dv, variant, batch.noise, batch.fake_labels, batch.step);
        report.g_total = tape.scalar_value(g.total);
        for (const auto& [name, var] : g.parts) report.g_components[name] = tape.scalar_value(var);
        for (const auto& [k, v] : g.info) report.info.emplace(k, v);
    }
    return report;
}

}  // namespace p2bench
