#include "p2bench/verify.hpp"

#include <cmath>
#include <sstream>

#include "p2bench/adam.hpp"
#include "p2bench/grad_check.hpp"
#include "p2bench/losses.hpp"
#include "p2bench/oracle.hpp"

namespace p2bench {

namespace {

using ad::GradCheckReport;
using ad::Tape;
using ad::Tensor;
using Var = Tape::Var;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

CheckResult run_check(const std::string& name, const std::function<CheckResult()>& body) {
    try {
        CheckResult r = body();
        r.name = name;
        return r;
    } catch (const std::exception& e) {
        return {name, false, std::string("exception: ") + e.what()};
    }
}

CheckResult pass_if(bool ok, const std::string& detail) { return {"", ok, detail}; }

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double lo = -1.5, double hi = 1.5) {
    Tensor t(r, c);
    for (double& x : t.data) x = rng.uniform(lo, hi);
    return t;
}

// ---- f-divergence table ----------------------------------------------------

CheckResult check_f_at_one() {
    double worst = 0.0;
    for (FDivergenceKind k : kAllFDivergences) {
        const double expected = k == FDivergenceKind::GAN ? -std::log(4.0) : 0.0;
        worst = std::max(worst, std::abs(f_generator(k, 1.0) - expected));
    }
    return pass_if(worst <= 1e-12, "max |f(1) - expected| = " + fmt(worst));
}

CheckResult check_f_exp_consistency() {
    double worst = 0.0;
    const bool ok = check_f_consistency(
        [](FDivergenceKind k, double t) { return f_of_exp(k, t); }, 1e-9, &worst);
    return pass_if(ok, "max |f_of_exp - f(e^t)| = " + fmt(worst));
}

CheckResult check_f_convexity() {
    double worst = -1e300;
    for (FDivergenceKind k : kAllFDivergences) {
        for (double a = 0.05; a <= 10.0; a += 0.1665)
            for (double b = a + 0.1665; b <= 10.0; b += 0.1665) {
                const double mid = f_generator(k, 0.5 * (a + b));
                const double avg = 0.5 * (f_generator(k, a) + f_generator(k, b));
                worst = std::max(worst, mid - avg);
            }
    }
    return pass_if(worst <= 1e-10, "max midpoint violation = " + fmt(worst));
}

CheckResult check_f_graph_matches_scalar() {
    double worst = 0.0;
    for (FDivergenceKind k : kAllFDivergences) {
        for (double t = -10.0; t <= 10.0; t += 0.37) {
            Tape tape;
            Var v = tape.leaf(Tensor::scalar(t));
            const double got = tape.scalar_value(f_of_exp_graph(tape, k, v));
            const double want = f_of_exp(k, t);
            worst = std::max(worst,
                             std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)}));
        }
    }
    return pass_if(worst <= 1e-12, "max relative |graph - scalar| = " + fmt(worst));
}

// ---- categorical divergences ------------------------------------------------

CheckResult check_kl_nonneg(Rng& rng) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 2 + rng.uniform_int(4);
        const Categorical p = random_categorical(k, rng, 0.01);
        const Categorical q = random_categorical(k, rng, 0.01);
        worst = std::min(worst, kl_categorical(p, q));
    }
    return pass_if(worst >= -1e-15, "min KL = " + fmt(worst));
}

CheckResult check_jsd_properties(Rng& rng) {
    double worst_sym = 0.0, lo = 0.0, hi = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 2 + rng.uniform_int(4);
        const Categorical p = random_categorical(k, rng);
        const Categorical q = random_categorical(k, rng);
        const double a = jsd_categorical(p, q), b = jsd_categorical(q, p);
        worst_sym = std::max(worst_sym, std::abs(a - b));
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    const bool ok = worst_sym <= 1e-12 && lo >= 0.0 && hi <= std::log(2.0) + 1e-12;
    return pass_if(ok, "max |jsd(p,q)-jsd(q,p)| = " + fmt(worst_sym) + ", range [" + fmt(lo) +
                           ", " + fmt(hi) + "]");
}

CheckResult check_tv_triangle(Rng& rng) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 2 + rng.uniform_int(4);
        const Categorical a = random_categorical(k, rng);
        const Categorical b = random_categorical(k, rng);
        const Categorical c = random_categorical(k, rng);
        worst = std::max(worst, tv_categorical(a, c) - tv_categorical(a, b) -
                                    tv_categorical(b, c));
    }
    return pass_if(worst <= 1e-12, "max triangle violation = " + fmt(worst));
}

CheckResult check_pinsker_sandwich(Rng& rng) {
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 2 + rng.uniform_int(4);
        const Categorical p = random_categorical(k, rng, 0.01);
        const Categorical q = random_categorical(k, rng, 0.01);
        const PinskerReport r = pinsker_sandwich(p, q);
        if (!r.all())
            return pass_if(false, "violated at instance " + std::to_string(i) + " (tv=" +
                                      fmt(r.tv) + ", kl=" + fmt(r.kl) + ", jsd=" + fmt(r.jsd) +
                                      ")");
    }
    return pass_if(true, "1000 random pairs hold");
}

// ---- oracle identities -------------------------------------------------------

CheckResult check_prop1(Rng& rng) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t nx = 2 + rng.uniform_int(4), ny = 2 + rng.uniform_int(4);
        const DiscreteJoint P = random_joint(nx, ny, rng);
        const DiscreteJoint Q = random_joint(nx, ny, rng);
        DiscreteJoint D;
        D.nx = nx;
        D.ny = ny;
        D.p.resize(nx * ny);
        double s = 0.0;
        for (double& v : D.p) {
            v = 0.02 + 0.96 * rng.uniform01();
            s += v;
        }
        // D is a table of discriminator outputs, not a distribution; keep as-is
        (void)s;
        worst = std::max(worst, prop1_identity(P, Q, D).abs_diff);
    }
    return pass_if(worst < 1e-12, "max |lhs-rhs| = " + fmt(worst));
}

CheckResult check_prop2(Rng& rng) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t nx = 2 + rng.uniform_int(4), ny = 2 + rng.uniform_int(4);
        const ConditionalTable p = random_conditional(nx, ny, rng);
        const ConditionalTable q = random_conditional(nx, ny, rng);
        const Categorical qx = random_categorical(nx, rng, 0.01);
        worst = std::max(worst, prop2_identity(p, q, qx.probs).abs_diff);
    }
    return pass_if(worst < 1e-12, "max |lhs-rhs| = " + fmt(worst));
}

CheckResult check_theorem1(Rng& rng) {
    double worst = 1e300;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t nx = 2 + rng.uniform_int(4), ny = 2 + rng.uniform_int(4);
        const DiscreteJoint P = random_joint(nx, ny, rng);
        const DiscreteJoint Q = random_joint(nx, ny, rng);
        const ConditionalTable qp = random_conditional(nx, ny, rng);
        const ConditionalTable qq = random_conditional(nx, ny, rng);
        worst = std::min(worst, theorem1_bound(P, Q, qp, qq).margin);
    }
    return pass_if(worst >= -1e-10, "min margin = " + fmt(worst));
}

CheckResult check_theorem1_edges() {
    // P = Q with the true posterior as both classifier estimates: both sides 0
    DiscreteJoint P;
    P.nx = 2;
    P.ny = 2;
    P.p = {0.3, 0.2, 0.1, 0.4};
    const PosteriorResult post = posterior_from_joint(P);
    BoundReport same = theorem1_bound(P, P, post.posterior, post.posterior);
    if (std::abs(same.lhs) > 1e-14 || std::abs(same.rhs) > 1e-14)
        return pass_if(false, "P = Q case: lhs " + fmt(same.lhs) + ", rhs " + fmt(same.rhs));

    // disjoint X-support with shared posteriors: lhs = ln 2, marginal term carries
    DiscreteJoint A, B;
    A.nx = B.nx = 2;
    A.ny = B.ny = 2;
    A.p = {0.6, 0.4, 0.0, 0.0};
    B.p = {0.0, 0.0, 0.6, 0.4};
    ConditionalTable shared;
    shared.rows = {Categorical{{0.6, 0.4}}, Categorical{{0.6, 0.4}}};
    const BoundReport disjoint = theorem1_bound(A, B, shared, shared);
    const bool ok = std::abs(disjoint.lhs - std::log(2.0)) <= 1e-12 && disjoint.margin >= 0.0;
    return pass_if(ok, "disjoint case: lhs " + fmt(disjoint.lhs) + ", rhs " + fmt(disjoint.rhs));
}

CheckResult check_posterior_reconstruction(Rng& rng) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t nx = 2 + rng.uniform_int(4), ny = 2 + rng.uniform_int(4);
        const DiscreteJoint j = random_joint(nx, ny, rng);
        const PosteriorResult post = posterior_from_joint(j);
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y) {
                const double back = post.x_marginal[x] * post.posterior.rows[x].probs[y];
                worst = std::max(worst, std::abs(back - j.at(x, y)));
            }
    }
    return pass_if(worst <= 1e-14, "max reconstruction error = " + fmt(worst));
}

// ---- diffcore ---------------------------------------------------------------

CheckResult check_logsumexp_shift(Rng& rng) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        Tensor v = random_tensor(1, 5, rng, -3.0, 3.0);
        const double c = rng.uniform(-50.0, 50.0);
        Tensor vc = v;
        for (double& x : vc.data) x += c;
        Tape tape;
        const double a = tape.scalar_value(tape.logsumexp_rows(tape.constant(v)));
        const double b = tape.scalar_value(tape.logsumexp_rows(tape.constant(vc)));
        worst = std::max(worst, std::abs(b - (a + c)));
    }
    return pass_if(worst <= 1e-12, "max shift defect = " + fmt(worst));
}

// one grad-check instance per primitive op family
CheckResult check_primitive_gradients(Rng& rng) {
    double worst = 0.0;
    std::string worst_op;
    auto note = [&](const std::string& op, const GradCheckReport& r) {
        if (r.max_rel_err > worst) {
            worst = r.max_rel_err;
            worst_op = op;
        }
    };

    for (int inst = 0; inst < 100; ++inst) {
        // matmul + add + mul + reductions in one composite
        Tensor A = random_tensor(3, 4, rng);
        Tensor B = random_tensor(4, 2, rng);
        Tensor C = random_tensor(1, 2, rng);
        note("matmul/add/mul/mean",
             ad::grad_check({&A, &B, &C},
                            [&](Tape& t, std::vector<Var>& leaves) {
                                Var a = t.leaf(A), b = t.leaf(B), c = t.leaf(C);
                                leaves = {a, b, c};
                                Var m = t.add(t.matmul(a, b), c);
                                return t.mean_all(t.mul(m, m));
                            },
                            1e-4));

        // matmul_nt + sub + sum_rows + sum
        Tensor D = random_tensor(3, 4, rng);
        Tensor E = random_tensor(2, 4, rng);
        note("matmul_nt/sub/sum_rows",
             ad::grad_check({&D, &E},
                            [&](Tape& t, std::vector<Var>& leaves) {
                                Var d = t.leaf(D), e = t.leaf(E);
                                leaves = {d, e};
                                Var m = t.matmul_nt(d, e);  // 3x2
                                Var s = t.sum_rows(t.sub(m, t.scale(m, 0.25)));
                                return t.sum_all(s);
                            },
                            1e-4));

        // unary chain kept away from kinks: relu/sigmoid/softplus/exp/log/
        // max_const/min_const
        Tensor X = random_tensor(2, 3, rng, 0.2, 2.0);
        for (double& x : X.data)
            if (std::abs(x - 0.7) < 5e-3) x += 0.01;  // keep off the max_const threshold
        note("unary chain",
             ad::grad_check({&X},
                            [&](Tape& t, std::vector<Var>& leaves) {
                                Var x = t.leaf(X);
                                leaves = {x};
                                Var u = t.softplus(t.sigmoid(t.relu(x)));
                                u = t.add(u, t.exp(t.scale(x, 0.3)));
                                u = t.add(u, t.log(t.add_const(x, 0.5)));
                                u = t.add(u, t.max_const(x, 0.7));
                                u = t.add(u, t.min_const(x, 1.4));
                                return t.mean_all(u);
                            },
                            1e-4));

        // logsumexp + take_per_row + gather + concat
        Tensor T = random_tensor(4, 3, rng);
        Tensor G = random_tensor(3, 2, rng);
        std::vector<int> rows = {rng.uniform_int(3), rng.uniform_int(3), rng.uniform_int(3),
                                 rng.uniform_int(3)};
        note("logsumexp/gather/take",
             ad::grad_check({&T, &G},
                            [&](Tape& t, std::vector<Var>& leaves) {
                                Var tt = t.leaf(T), gg = t.leaf(G);
                                leaves = {tt, gg};
                                Var lse = t.logsumexp_rows(tt);            // 4x1
                                Var pick = t.take_per_row(tt, rows);       // 4x1
                                Var gat = t.gather_rows(gg, rows);         // 4x2
                                Var cat = t.concat_cols(lse, pick);        // 4x2
                                Var cr = t.concat_rows(cat, gat);          // 8x2
                                return t.mean_all(t.mul(cr, cr));
                            },
                            1e-4));
    }
    return pass_if(worst <= 1e-4, "max rel err = " + fmt(worst) + " (" + worst_op + ")");
}

CheckResult check_adam_recurrence() {
    // single scalar parameter, constant gradient 1, lr 0.1
    ad::AdamConfig cfg;
    cfg.lr = 0.1;
    ad::AdamState state(cfg);
    Tensor p = Tensor::scalar(2.0);
    std::vector<Tensor*> params = {&p};
    state.init(params);

    Tensor g = Tensor::scalar(1.0);
    state.apply(params, {g});
    // bias-corrected first step moves by lr * g / (|g| + eps)
    const double expect1 = 2.0 - 0.1 * 1.0 / (1.0 + cfg.eps);
    if (std::abs(p.data[0] - expect1) > 1e-12)
        return pass_if(false, "first step: got " + fmt(p.data[0]) + ", want " + fmt(expect1));

    state.apply(params, {g});
    // recompute the two-step recurrence by hand
    double m = 0.0, v = 0.0, x = 2.0;
    for (int t = 1; t <= 2; ++t) {
        m = cfg.beta1 * m + (1 - cfg.beta1) * 1.0;
        v = cfg.beta2 * v + (1 - cfg.beta2) * 1.0;
        const double mh = m / (1 - std::pow(cfg.beta1, t));
        const double vh = v / (1 - std::pow(cfg.beta2, t));
        x -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    }
    if (std::abs(p.data[0] - x) > 1e-12 || state.step_count() != 2)
        return pass_if(false, "second step mismatch");

    // zero gradient on a fresh state leaves parameters unchanged
    ad::AdamState fresh(cfg);
    Tensor q = Tensor::scalar(0.75);
    std::vector<Tensor*> qp = {&q};
    fresh.init(qp);
    fresh.apply(qp, {Tensor::scalar(0.0)});
    return pass_if(q.data[0] == 0.75, "zero-grad fixpoint and hand recurrences hold");
}

// ---- models -----------------------------------------------------------------

CheckResult check_model_gradients(Rng& rng) {
    double worst = 0.0;
    for (int inst = 0; inst < 10; ++inst) {
        GeneratorParams gen = init_generator(3, rng);
        DiscriminatorParams disc = init_discriminator(3, rng);
        Tensor x = random_tensor(4, 1, rng, -3.0, 3.0);
        Tensor z = random_tensor(4, 2, rng, -1.0, 1.0);
        const std::vector<int> y = {0, 2, 1, rng.uniform_int(3)};

        auto disc_tensors = [&]() {
            std::vector<Tensor*> out;
            for (NamedParam& p : param_list(disc)) out.push_back(p.tensor);
            return out;
        }();
        auto bind_disc_leaves = [&](Tape& t, std::vector<Var>& leaves) {
            DiscVars dv = bind(t, disc, true);
            leaves = {dv.t_w1,  dv.t_b1, dv.t_w2,  dv.t_b2,  dv.Vp,     dv.Vq,   dv.Vtied,
                      dv.psi_w, dv.psi_b, dv.unc_w, dv.unc_b, dv.gate_w, dv.gate_b,
                      dv.gate_scalar};
            return dv;
        };

        GradCheckReport r = ad::grad_check(
            disc_tensors,
            [&](Tape& t, std::vector<Var>& leaves) {
                DiscVars dv = bind_disc_leaves(t, leaves);
                Var xc = t.constant(x);
                Var logit = dual_proj_logit(t, dv, xc, y);
                Var post = log_posterior(t, dv, Head::P, xc);
                Var lam = gate(t, dv, xc);
                Var u = uncond_logit(t, dv, xc);
                Var tied = proj_logit(t, dv, xc, y);
                Var s = t.add(t.mean_all(logit), t.mean_all(post));
                s = t.add(s, t.mean_all(lam));
                s = t.add(s, t.mean_all(u));
                return t.add(s, t.mean_all(tied));
            },
            1e-4);
        worst = std::max(worst, r.max_rel_err);

        auto gen_tensors = [&]() {
            std::vector<Tensor*> out;
            for (NamedParam& p : param_list(gen)) out.push_back(p.tensor);
            return out;
        }();
        GradCheckReport rg = ad::grad_check(
            gen_tensors,
            [&](Tape& t, std::vector<Var>& leaves) {
                GenVars gv = bind(t, gen, true);
                leaves = {gv.emb, gv.w1, gv.b1, gv.w2, gv.b2, gv.w3, gv.b3};
                Var out = generate(t, gv, t.constant(z), y);
                return t.mean_all(t.mul(out, out));
            },
            1e-4);
        worst = std::max(worst, rg.max_rel_err);
    }
    return pass_if(worst <= 1e-4, "max rel err = " + fmt(worst));
}

CheckResult check_dual_tied_identity(Rng& rng) {
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        DiscriminatorParams disc = init_discriminator(3, rng);
        // tie V to Vp - Vq
        for (std::size_t i = 0; i < disc.Vtied.size(); ++i)
            disc.Vtied.data[i] = disc.Vp.data[i] - disc.Vq.data[i];
        Tensor x = random_tensor(5, 1, rng, -4.0, 4.0);
        const std::vector<int> y = {0, 1, 2, rng.uniform_int(3), rng.uniform_int(3)};
        Tape tape;
        DiscVars dv = bind(tape, disc, false);
        Var a = dual_proj_logit(tape, dv, tape.constant(x), y);
        Var b = proj_logit(tape, dv, tape.constant(x), y);
        const Tensor& ta = tape.value(a);
        const Tensor& tb = tape.value(b);
        for (std::size_t i = 0; i < ta.size(); ++i)
            worst = std::max(worst, std::abs(ta.data[i] - tb.data[i]));
    }
    return pass_if(worst <= 1e-12, "max |dual - tied| = " + fmt(worst));
}

CheckResult check_posterior_normalization(Rng& rng) {
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        DiscriminatorParams disc = init_discriminator(3, rng);
        Tensor x = random_tensor(6, 1, rng, -4.0, 4.0);
        Tape tape;
        DiscVars dv = bind(tape, disc, false);
        Var post = log_posterior(tape, dv, inst % 2 ? Head::P : Head::Q, tape.constant(x));
        const Tensor& t = tape.value(post);
        for (std::size_t i = 0; i < t.rows(); ++i) {
            double se = 0.0;
            for (std::size_t j = 0; j < t.cols(); ++j) {
                if (t.at(i, j) > 0.0) worst = std::max(worst, t.at(i, j));
                se += std::exp(t.at(i, j));
            }
            worst = std::max(worst, std::abs(se - 1.0));
        }
    }
    return pass_if(worst <= 1e-12, "max normalization defect = " + fmt(worst));
}

// ---- losses -------------------------------------------------------------------

Batch random_batch(Rng& rng, std::size_t n = 4) {
    Batch b;
    b.real.xs.resize(n);
    b.real.ys.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        b.real.xs[i] = rng.uniform(-4.0, 8.0);
        b.real.ys[i] = rng.uniform_int(3);
    }
    b.noise = Tensor(n, 2);
    for (double& v : b.noise.data) v = rng.normal();
    b.fake_labels.resize(n);
    for (int& y : b.fake_labels) y = rng.uniform_int(3);
    b.step = 7;
    return b;
}

std::vector<LossVariant> all_variants(ActivationKind act) {
    std::vector<LossVariant> out;
    for (VariantKind k : kAllVariantKinds) {
        LossVariant v;
        v.kind = k;
        v.activation = act;
        if (k == VariantKind::FCGAN) v.fdiv = FDivergenceKind::ReverseKL;
        if (k == VariantKind::P2GAN_D) v.decay_T = 100.0;
        out.push_back(v);
    }
    return out;
}

CheckResult check_loss_gradients(Rng& rng) {
    double worst = 0.0;
    std::string worst_name;
    for (ActivationKind act : {ActivationKind::SoftplusBCE, ActivationKind::Hinge}) {
        for (const LossVariant& variant : all_variants(act)) {
            GeneratorParams gen = init_generator(3, rng);
            DiscriminatorParams disc = init_discriminator(3, rng);
            // keep the scalar gate in sigmoid's responsive range
            disc.gate_scalar.data[0] = 0.5;
            const Batch batch = random_batch(rng);
            const std::vector<double> fake_x = generate_values(gen, batch.noise, batch.fake_labels);

            std::vector<Tensor*> disc_tensors;
            for (NamedParam& p : param_list(disc)) disc_tensors.push_back(p.tensor);
            GradCheckReport rd = ad::grad_check(
                disc_tensors,
                [&](Tape& t, std::vector<Var>& leaves) {
                    DiscVars dv = bind(t, disc, true);
                    leaves = {dv.t_w1,  dv.t_b1, dv.t_w2,  dv.t_b2,  dv.Vp,     dv.Vq,   dv.Vtied,
                              dv.psi_w, dv.psi_b, dv.unc_w, dv.unc_b, dv.gate_w, dv.gate_b,
                              dv.gate_scalar};
                    return build_d_loss(t, dv, variant, batch.real.xs, batch.real.ys, fake_x,
                                        batch.fake_labels, batch.step)
                        .total;
                },
                1e-4);
            if (rd.max_rel_err > worst) {
                worst = rd.max_rel_err;
                worst_name = variant.name() + "/" + activation_name(act) + "/d";
            }

            std::vector<Tensor*> gen_tensors;
            for (NamedParam& p : param_list(gen)) gen_tensors.push_back(p.tensor);
            GradCheckReport rg = ad::grad_check(
                gen_tensors,
                [&](Tape& t, std::vector<Var>& leaves) {
                    GenVars gv = bind(t, gen, true);
                    DiscVars dv = bind(t, disc, false);
                    leaves = {gv.emb, gv.w1, gv.b1, gv.w2, gv.b2, gv.w3, gv.b3};
                    return build_g_loss(t, gv, dv, variant, batch.noise, batch.fake_labels,
                                        batch.step)
                        .total;
                },
                1e-4);
            if (rg.max_rel_err > worst) {
                worst = rg.max_rel_err;
                worst_name = variant.name() + "/" + activation_name(act) + "/g";
            }
        }
    }
    return pass_if(worst <= 1e-4, "max rel err = " + fmt(worst) + " (" + worst_name + ")");
}

CheckResult check_reduction_identities(Rng& rng) {
    double worst = 0.0;
    std::string what;
    auto note = [&](const std::string& name, double err) {
        if (err > worst) {
            worst = err;
            what = name;
        }
    };

    for (int inst = 0; inst < 20; ++inst) {
        GeneratorParams gen = init_generator(3, rng);
        DiscriminatorParams disc = init_discriminator(3, rng);
        const Batch batch = random_batch(rng, 6);
        const ActivationKind act =
            inst % 2 ? ActivationKind::Hinge : ActivationKind::SoftplusBCE;

        LossVariant p2;
        p2.kind = VariantKind::P2GAN;
        p2.activation = act;
        const LossReport rep_p2 = evaluate_losses(gen, disc, batch, p2);

        // over-parameterized Proj-GAN: tie V to Vp - Vq
        DiscriminatorParams tied = disc;
        for (std::size_t i = 0; i < tied.Vtied.size(); ++i)
            tied.Vtied.data[i] = tied.Vp.data[i] - tied.Vq.data[i];
        LossVariant proj;
        proj.kind = VariantKind::ProjGAN;
        proj.activation = act;
        const LossReport rep_proj = evaluate_losses(gen, tied, batch, proj);

        // P2GAN without its CE terms equals the over-parameterized Proj-GAN
        const double p2_adv =
            rep_p2.d_components.at("adv_real") + rep_p2.d_components.at("adv_fake");
        note("p2gan minus CE vs projgan (d)", std::abs(p2_adv - rep_proj.d_total));
        note("p2gan vs projgan (g)", std::abs(rep_p2.g_total - rep_proj.g_total));

        // weighted main family with the gate forced (numerically) to zero
        DiscriminatorParams closed = disc;
        closed.gate_scalar.data[0] = -50.0;
        for (double& v : closed.gate_w.data) v = 0.0;
        closed.gate_b.data[0] = -50.0;
        for (VariantKind k : {VariantKind::P2GAN_S, VariantKind::P2GAN_A,
                              VariantKind::P2GAN_S_ALT, VariantKind::P2GAN_A_ALT}) {
            LossVariant w;
            w.kind = k;
            w.activation = act;
            const LossReport rep_w = evaluate_losses(gen, closed, batch, w);
            DiscriminatorParams tied_closed = closed;
            for (std::size_t i = 0; i < tied_closed.Vtied.size(); ++i)
                tied_closed.Vtied.data[i] = tied_closed.Vp.data[i] - tied_closed.Vq.data[i];
            const LossReport rep_proj2 = evaluate_losses(gen, tied_closed, batch, proj);
            note("lambda=0 " + w.name() + " (d)", std::abs(rep_w.d_total - rep_proj2.d_total));
            note("lambda=0 " + w.name() + " (g)", std::abs(rep_w.g_total - rep_proj2.g_total));
        }

        // TAC-GAN discriminator = f-cGAN(reverse KL) discriminator + Lp_mi(fake)
        LossVariant fc;
        fc.kind = VariantKind::FCGAN;
        fc.activation = act;
        fc.fdiv = FDivergenceKind::ReverseKL;
        LossVariant tac;
        tac.kind = VariantKind::TACGAN;
        tac.activation = act;
        const LossReport rep_fc = evaluate_losses(gen, disc, batch, fc);
        const LossReport rep_tac = evaluate_losses(gen, disc, batch, tac);
        note("tacgan - fcgan d == ce_p_fake",
             std::abs((rep_tac.d_total - rep_fc.d_total) - rep_tac.d_components.at("ce_p_fake")));
        note("tacgan g == fcgan g", std::abs(rep_tac.g_total - rep_fc.g_total));

        // reverse-KL f-term is the CE difference on fake data
        {
            Tape tape;
            DiscVars dv = bind(tape, disc, false);
            GenVars gv = bind(tape, gen, false);
            Var fake = generate(tape, gv, tape.constant(batch.noise), batch.fake_labels);
            Var cep = ce_loss_graph(tape, dv, Head::P, fake, batch.fake_labels);
            Var ceq = ce_loss_graph(tape, dv, Head::Q, fake, batch.fake_labels);
            const double diff = tape.scalar_value(cep) - tape.scalar_value(ceq);
            note("fcgan reverse-kl f-term == ce difference",
                 std::abs(rep_fc.g_components.at("f_term") - diff));
        }
    }
    return pass_if(worst <= 1e-12, "max identity defect = " + fmt(worst) + " (" + what + ")");
}

CheckResult check_component_bookkeeping(Rng& rng) {
    double worst = 0.0;
    for (ActivationKind act : {ActivationKind::SoftplusBCE, ActivationKind::Hinge}) {
        for (const LossVariant& variant : all_variants(act)) {
            GeneratorParams gen = init_generator(3, rng);
            DiscriminatorParams disc = init_discriminator(3, rng);
            const Batch batch = random_batch(rng, 5);
            const LossReport rep = evaluate_losses(gen, disc, batch, variant);
            double ds = 0.0, gs = 0.0;
            for (const auto& [k, v] : rep.d_components) ds += v;
            for (const auto& [k, v] : rep.g_components) gs += v;
            worst = std::max(worst, std::abs(ds - rep.d_total));
            worst = std::max(worst, std::abs(gs - rep.g_total));
        }
    }
    return pass_if(worst <= 1e-10, "max |sum(components) - total| = " + fmt(worst));
}

}  // namespace

bool check_f_consistency(const std::function<double(FDivergenceKind, double)>& f_of_exp_impl,
                         double tolerance, double* max_err) {
    // error relative to magnitude: the Pearson and GAN rows reach ~1e9 at
    // t = 10, where double rounding alone exceeds any absolute 1e-9
    double worst = 0.0;
    for (FDivergenceKind k : kAllFDivergences)
        for (double t = -10.0; t <= 10.0; t += 0.01) {
            const double a = f_of_exp_impl(k, t);
            const double b = f_generator(k, std::exp(t));
            worst = std::max(worst, std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}));
        }
    if (max_err) *max_err = worst;
    return worst <= tolerance;
}

std::vector<CheckResult> run_verification(std::uint64_t seed) {
    std::vector<CheckResult> results;
    Rng rng(seed);
    auto add = [&](const std::string& name, const std::function<CheckResult()>& body) {
        results.push_back(run_check(name, body));
    };

    add("f-table values at u=1", check_f_at_one);
    add("f-of-exp consistency (1e-9)", check_f_exp_consistency);
    add("f-generator convexity", check_f_convexity);
    add("f-of-exp graph equals scalar", check_f_graph_matches_scalar);
    add("categorical KL non-negative (1000)", [&] { return check_kl_nonneg(rng); });
    add("categorical JSD symmetric and bounded (1000)", [&] { return check_jsd_properties(rng); });
    add("categorical TV triangle inequality (1000)", [&] { return check_tv_triangle(rng); });
    add("Pinsker and JSD-TV sandwich (1000)", [&] { return check_pinsker_sandwich(rng); });
    add("proposition 1 identity (1000)", [&] { return check_prop1(rng); });
    add("proposition 2 identity (1000)", [&] { return check_prop2(rng); });
    add("theorem 1 bound margin (1000)", [&] { return check_theorem1(rng); });
    add("theorem 1 edge cases", check_theorem1_edges);
    add("posterior reconstruction (100)", [&] { return check_posterior_reconstruction(rng); });
    add("logsumexp shift invariance (100)", [&] { return check_logsumexp_shift(rng); });
    add("primitive op gradients (100)", [&] { return check_primitive_gradients(rng); });
    add("adam recurrence", check_adam_recurrence);
    add("model head gradients", [&] { return check_model_gradients(rng); });
    add("dual equals tied projection", [&] { return check_dual_tied_identity(rng); });
    add("log-posterior normalization", [&] { return check_posterior_normalization(rng); });
    add("loss gradients, 15 variants x 2 activations", [&] { return check_loss_gradients(rng); });
    add("loss reduction identities", [&] { return check_reduction_identities(rng); });
    add("loss component bookkeeping", [&] { return check_component_bookkeeping(rng); });
    return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const CheckResult& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace p2bench
