#include "p2bench/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "p2bench/io.hpp"

namespace p2bench {

void TrainConfig::validate() const {
    variant.validate();
    kernel.validate();
    if (d_m <= 0.0) throw std::invalid_argument("config: d_m must be positive");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
    if (d_steps_per_g < 1) throw std::invalid_argument("config: d_steps_per_g must be >= 1");
    if (eval_every < 1) throw std::invalid_argument("config: eval_every must be >= 1");
    if (eval_every > iterations)
        throw std::invalid_argument("config: eval_every must be <= iterations");
    if (eval_samples < 2) throw std::invalid_argument("config: eval_samples must be >= 2");
}

MetricBundle evaluate(const GeneratorParams& gen, const MoGSpec& spec, int n_per_class, Rng& rng,
                      const KernelSpec& kernel) {
    if (n_per_class < 2) throw std::invalid_argument("evaluate: n_per_class must be >= 2");
    const std::size_t k = spec.num_classes();
    const std::size_t n = static_cast<std::size_t>(n_per_class);

    std::vector<std::vector<double>> real(k), fake(k);
    for (std::size_t c = 0; c < k; ++c) {
        real[c].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            real[c][i] = spec.means[c] + spec.stds[c] * rng.normal();

        Tensor z(n, gen.noise.dim);
        for (double& v : z.data) v = rng.normal();
        fake[c] = generate_values(gen, z, std::vector<int>(n, static_cast<int>(c)));
    }

    MetricBundle out;
    std::vector<double> pooled_real, pooled_fake;
    pooled_real.reserve(k * n);
    pooled_fake.reserve(k * n);
    for (std::size_t c = 0; c < k; ++c) {
        out.mmd_class[c] = mmd2(real[c], fake[c], kernel, MmdMode::Biased);
        const GaussianFit fr = fit_gaussian(real[c]);
        const GaussianFit ff = fit_gaussian(fake[c]);
        if (ff.sigma == 0.0) out.degenerate_fake = true;
        out.fid_class[c] = frechet_1d(fr.mu, fr.sigma, ff.mu, ff.sigma);
        pooled_real.insert(pooled_real.end(), real[c].begin(), real[c].end());
        pooled_fake.insert(pooled_fake.end(), fake[c].begin(), fake[c].end());
    }
    out.mmd_marginal = mmd2(pooled_real, pooled_fake, kernel, MmdMode::Biased);
    out.fid_max = std::max({out.fid_class[0], out.fid_class[1], out.fid_class[2]});
    return out;
}

namespace {

std::vector<Tensor*> tensors_of(std::vector<NamedParam> list) {
    std::vector<Tensor*> out;
    out.reserve(list.size());
    for (NamedParam& p : list) out.push_back(p.tensor);
    return out;
}

std::string describe_parts(Tape& tape, const BuiltLoss& loss) {
    std::ostringstream os;
    for (const auto& [name, var] : loss.parts) os << " " << name << "=" << tape.value(var).data[0];
    return os.str();
}

// gate value to record alongside a history entry, when the variant has a
// scalar or scheduled gate
bool lambda_at(const LossVariant& v, const DiscriminatorParams& disc, long iteration,
               double& out) {
    switch (v.kind) {
        case VariantKind::P2GAN_D:
            out = std::exp(-static_cast<double>(iteration) / *v.decay_T);
            return true;
        case VariantKind::P2GAN_S:
        case VariantKind::P2GAN_SP:
        case VariantKind::P2GAN_S_ALT:
        case VariantKind::P2GAN_SP_ALT:
            out = ad::stable_sigmoid(disc.gate_scalar.data[0]);
            return true;
        default:
            return false;
    }
}

}  // namespace

RunResult train_run(const TrainConfig& config) {
    config.validate();
    const auto t_start = std::chrono::steady_clock::now();

    const MoGSpec spec = make_spec(config.d_m);
    const std::size_t k = spec.num_classes();

    Rng init_rng(mix_seed(config.seed, 0x1757));
    Rng data_rng(mix_seed(config.seed, 0x2663));
    GeneratorParams gen = init_generator(k, init_rng);
    DiscriminatorParams disc = init_discriminator(k, init_rng);

    ad::AdamState adam_g(config.optimizer), adam_d(config.optimizer);
    auto gen_tensors = tensors_of(param_list(gen));
    auto disc_tensors = tensors_of(param_list(disc));
    adam_g.init(gen_tensors);
    adam_d.init(disc_tensors);

    RunResult result;
    result.seed = config.seed;
    result.variant = config.variant.name();
    result.activation = activation_name(config.variant.activation);
    result.d_m = config.d_m;
    result.config_digest = config_digest(config);

    auto eval_at = [&](long iteration) {
        Rng eval_rng(mix_seed(config.seed, 0xe7a1000 + static_cast<std::uint64_t>(iteration)));
        return evaluate(gen, spec, config.eval_samples, eval_rng, config.kernel);
    };

    result.initial = eval_at(0);

    const std::size_t bs = static_cast<std::size_t>(config.batch_size);
    std::vector<int> fake_y(bs);

    for (long t = 0; t < config.iterations; ++t) {
        for (int dstep = 0; dstep < config.d_steps_per_g; ++dstep) {
            const LabeledBatch real = sample(spec, bs, data_rng);
            Tensor noise(bs, gen.noise.dim);
            for (double& v : noise.data) v = data_rng.normal();
            for (int& y : fake_y) y = data_rng.uniform_int(static_cast<int>(k));
            const std::vector<double> fake_x = generate_values(gen, noise, fake_y);

            Tape tape;
            DiscVars dv = bind(tape, disc, /*trainable=*/true);
            BuiltLoss loss;
            try {
                loss = build_d_loss(tape, dv, config.variant, real.xs, real.ys, fake_x, fake_y, t);
            } catch (const ad::TapeError& e) {
                throw TrainAbort("non-finite discriminator loss at iteration " +
                                 std::to_string(t) + ": " + e.what());
            }
            const double d_total = tape.scalar_value(loss.total);
            if (!std::isfinite(d_total))
                throw TrainAbort("non-finite discriminator loss at iteration " +
                                 std::to_string(t) + ":" + describe_parts(tape, loss));
            tape.backward(loss.total);

            std::vector<Tensor> grads;
            grads.reserve(disc_tensors.size());
            auto dvars = std::vector<Tape::Var>{dv.t_w1,  dv.t_b1,  dv.t_w2,   dv.t_b2,
                                                dv.Vp,    dv.Vq,    dv.Vtied,  dv.psi_w,
                                                dv.psi_b, dv.unc_w, dv.unc_b,  dv.gate_w,
                                                dv.gate_b, dv.gate_scalar};
            for (Tape::Var v : dvars) grads.push_back(tape.grad(v));
            adam_d.apply(disc_tensors, grads);
        }

        {
            Tensor noise(bs, gen.noise.dim);
            for (double& v : noise.data) v = data_rng.normal();
            for (int& y : fake_y) y = data_rng.uniform_int(static_cast<int>(k));

            Tape tape;
            GenVars gv = bind(tape, gen, /*trainable=*/true);
            DiscVars dv = bind(tape, disc, /*trainable=*/false);
            BuiltLoss loss;
            try {
                loss = build_g_loss(tape, gv, dv, config.variant, noise, fake_y, t);
            } catch (const ad::TapeError& e) {
                throw TrainAbort("non-finite generator loss at iteration " + std::to_string(t) +
                                 ": " + e.what());
            }
            const double g_total = tape.scalar_value(loss.total);
            if (!std::isfinite(g_total))
                throw TrainAbort("non-finite generator loss at iteration " + std::to_string(t) +
                                 ":" + describe_parts(tape, loss));
            tape.backward(loss.total);

            std::vector<Tensor> grads;
            grads.reserve(gen_tensors.size());
            auto gvars = std::vector<Tape::Var>{gv.emb, gv.w1, gv.b1, gv.w2,
                                                gv.b2,  gv.w3, gv.b3};
            for (Tape::Var v : gvars) grads.push_back(tape.grad(v));
            adam_g.apply(gen_tensors, grads);
        }

        const long done = t + 1;
        if (done % config.eval_every == 0 || done == config.iterations) {
            HistoryEntry entry;
            entry.iteration = static_cast<int>(done);
            entry.metrics = eval_at(done);
            entry.has_lambda = lambda_at(config.variant, disc, done, entry.lambda);
            result.history.push_back(std::move(entry));
        }
    }

    result.finals = result.history.back().metrics;
    result.generator_json = params_to_json(gen);
    result.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

}  // namespace p2bench
