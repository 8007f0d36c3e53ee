// Acceptance suite: runs every criterion end to end and prints one
// PASS/FAIL line per criterion. Exits non-zero if any criterion fails.
//
// Training-heavy criteria reuse result files under ./p2bench_acceptance so
// subsequent invocations resume instead of retraining.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "p2bench/io.hpp"
#include "p2bench/losses.hpp"
#include "p2bench/metrics.hpp"
#include "p2bench/report.hpp"
#include "p2bench/sweep.hpp"
#include "p2bench/trainer.hpp"
#include "p2bench/verify.hpp"

using namespace p2bench;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int worker_count() {
    if (const char* env = std::getenv("P2BENCH_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---- criterion 1: verification suite ---------------------------------------

Criterion criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = run_verification();
    const double secs = seconds_since(t0);
    int failed = 0;
    std::string first_failure;
    for (const CheckResult& r : results)
        if (!r.pass) {
            ++failed;
            if (first_failure.empty()) first_failure = r.name + ": " + r.detail;
        }
    Criterion c;
    c.name = "verification suite passes in full, under 60 s";
    c.pass = failed == 0 && secs < 60.0;
    std::ostringstream os;
    os << results.size() << " checks, " << failed << " failed, " << secs << " s";
    if (!first_failure.empty()) os << "; first failure: " << first_failure;
    c.detail = os.str();
    return c;
}

// ---- criterion 2: loss reduction identities ---------------------------------

Criterion criterion2() {
    Criterion c;
    c.name = "loss reduction identities hold at 1e-12";
    double worst = 0.0;
    std::string what;
    auto note = [&](const std::string& name, double err) {
        if (err > worst) {
            worst = err;
            what = name;
        }
    };

    Rng rng(0xACCE2);
    for (int inst = 0; inst < 50; ++inst) {
        GeneratorParams gen = init_generator(3, rng);
        DiscriminatorParams disc = init_discriminator(3, rng);
        Batch batch;
        const std::size_t n = 8;
        batch.real.xs.resize(n);
        batch.real.ys.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            batch.real.xs[i] = rng.uniform(-4.0, 10.0);
            batch.real.ys[i] = rng.uniform_int(3);
        }
        batch.noise = ad::Tensor(n, 2);
        for (double& v : batch.noise.data) v = rng.normal();
        batch.fake_labels.resize(n);
        for (int& y : batch.fake_labels) y = rng.uniform_int(3);

        const ActivationKind act =
            inst % 2 ? ActivationKind::Hinge : ActivationKind::SoftplusBCE;
        LossVariant p2, proj, fc, tac;
        p2.kind = VariantKind::P2GAN;
        proj.kind = VariantKind::ProjGAN;
        fc.kind = VariantKind::FCGAN;
        fc.fdiv = FDivergenceKind::ReverseKL;
        tac.kind = VariantKind::TACGAN;
        for (LossVariant* v : {&p2, &proj, &fc, &tac}) v->activation = act;

        // (a) P2GAN minus CE terms == Proj-GAN with tied V = Vp - Vq
        const LossReport rep_p2 = evaluate_losses(gen, disc, batch, p2);
        DiscriminatorParams tied = disc;
        for (std::size_t i = 0; i < tied.Vtied.size(); ++i)
            tied.Vtied.data[i] = tied.Vp.data[i] - tied.Vq.data[i];
        const LossReport rep_proj = evaluate_losses(gen, tied, batch, proj);
        note("p2gan-vs-proj d", std::abs(rep_p2.d_components.at("adv_real") +
                                         rep_p2.d_components.at("adv_fake") - rep_proj.d_total));
        note("p2gan-vs-proj g", std::abs(rep_p2.g_total - rep_proj.g_total));

        // (b) weighted main family at lambda -> 0 reduces to the same
        DiscriminatorParams closed = disc;
        closed.gate_scalar.data[0] = -60.0;
        for (double& v : closed.gate_w.data) v = 0.0;
        closed.gate_b.data[0] = -60.0;
        DiscriminatorParams closed_tied = closed;
        for (std::size_t i = 0; i < closed_tied.Vtied.size(); ++i)
            closed_tied.Vtied.data[i] = closed_tied.Vp.data[i] - closed_tied.Vq.data[i];
        const LossReport rep_proj0 = evaluate_losses(gen, closed_tied, batch, proj);
        for (VariantKind k : {VariantKind::P2GAN_S, VariantKind::P2GAN_A}) {
            LossVariant w;
            w.kind = k;
            w.activation = act;
            const LossReport rep_w = evaluate_losses(gen, closed, batch, w);
            note("lambda0 " + w.name() + " d", std::abs(rep_w.d_total - rep_proj0.d_total));
            note("lambda0 " + w.name() + " g", std::abs(rep_w.g_total - rep_proj0.g_total));
        }

        // (c) TAC-GAN d-loss minus f-cGAN(reverse-kl) d-loss == Lp_mi(fake)
        const LossReport rep_fc = evaluate_losses(gen, disc, batch, fc);
        const LossReport rep_tac = evaluate_losses(gen, disc, batch, tac);
        note("tac-minus-fc", std::abs((rep_tac.d_total - rep_fc.d_total) -
                                      rep_tac.d_components.at("ce_p_fake")));

        // (d) f-cGAN(reverse-kl) generator f-term == Lp_mi(fake) - Lq_mi(fake)
        const std::vector<double> fake_x = generate_values(gen, batch.noise, batch.fake_labels);
        ad::Tape tape;
        DiscVars dv = bind(tape, disc, false);
        const double cep = tape.scalar_value(ce_loss_graph(
            tape, dv, Head::P, tape.constant(ad::Tensor::col(fake_x)), batch.fake_labels));
        const double ceq = tape.scalar_value(ce_loss_graph(
            tape, dv, Head::Q, tape.constant(ad::Tensor::col(fake_x)), batch.fake_labels));
        note("fc f-term prop2", std::abs(rep_fc.g_components.at("f_term") - (cep - ceq)));
    }

    c.pass = worst <= 1e-12;
    c.detail = "max identity defect " + std::to_string(worst) + " (" + what + ")";
    return c;
}

// ---- criterion 3: quick-preset reproduction ---------------------------------

Criterion criterion3() {
    Criterion c;
    c.name = "quick preset: P2GAN outranks Proj-GAN on MMD, max-FID direction";
    const auto t0 = std::chrono::steady_clock::now();

    SweepConfig sweep;
    apply_quick_preset(sweep);
    sweep.base_seed = 1;
    sweep.parallelism = worker_count();
    sweep.output_dir = "p2bench_acceptance/quick";
    const SweepOutcome outcome = run_sweep(sweep);
    if (outcome.failed > 0) {
        c.detail = std::to_string(outcome.failed) + " runs failed: " + outcome.failures.front();
        return c;
    }

    const ReportBundle report =
        build_report(sweep.output_dir, "p2bench_acceptance/quick/report");
    const RankTable& ranks = report.rank_tables.at("overall");
    double rank_p2 = -1.0, rank_proj = -1.0;
    for (std::size_t m = 0; m < ranks.methods.size(); ++m) {
        if (ranks.methods[m] == "p2gan") rank_p2 = ranks.average[m];
        if (ranks.methods[m] == "projgan") rank_proj = ranks.average[m];
    }

    int fid_better = 0;
    for (double d_m : sweep.d_m_values) {
        const double p2 =
            report.settings.at({"p2gan", "bce", d_m}).values.at("FIDmax");
        const double proj =
            report.settings.at({"projgan", "bce", d_m}).values.at("FIDmax");
        if (p2 <= proj) ++fid_better;
    }

    c.pass = rank_p2 >= 0.0 && rank_proj >= 0.0 && rank_p2 < rank_proj && fid_better >= 2;
    std::ostringstream os;
    os << "avg MMD rank p2gan " << rank_p2 << " vs projgan " << rank_proj << "; top-90% max-FID"
       << " better in " << fid_better << "/3 settings; " << seconds_since(t0) << " s";
    c.detail = os.str();
    return c;
}

// ---- criterion 4: rank machinery against the published table -----------------

Criterion criterion4() {
    Criterion c;
    c.name = "rank machinery reproduces the published overall average ranks";

    // Top-90% MMD means for {class 0, 1, 2, marginal} x d_m in {1..5},
    // BCE block then hinge block, methods in the order
    // Proj-GAN, TAC-GAN*, f-cGAN, P2GAN.
    static const double kBce[4][20] = {
        {0.040, 0.106, 0.273, 0.074, 0.044, 0.327, 1.246, 0.248, 0.060, 0.635,
         1.628, 0.325, 0.073, 0.932, 3.379, 0.527, 0.166, 3.298, 3.903, 1.126},
        {0.015, 0.033, 0.100, 0.027, 0.021, 0.124, 0.529, 0.067, 0.020, 0.272,
         0.803, 0.149, 0.027, 0.412, 1.969, 0.106, 0.035, 1.139, 2.160, 0.156},
        {0.018, 0.042, 0.170, 0.031, 0.019, 0.090, 0.383, 0.047, 0.030, 0.193,
         0.635, 0.087, 0.024, 0.575, 2.170, 0.276, 0.037, 0.857, 3.328, 0.287},
        {0.009, 0.028, 0.151, 0.026, 0.014, 0.080, 0.345, 0.046, 0.016, 0.160,
         0.639, 0.084, 0.028, 0.237, 1.530, 0.056, 0.030, 0.655, 2.725, 0.261},
    };
    static const double kHinge[4][20] = {
        {0.112, 0.267, 0.879, 0.178, 0.167, 0.725, 2.373, 0.492, 0.172, 1.455,
         6.385, 0.969, 0.249, 4.904, 15.496, 3.368, 0.386, 11.002, 29.382, 7.407},
        {0.190, 0.474, 1.376, 0.416, 0.304, 1.635, 4.213, 1.060, 0.357, 3.504,
         12.817, 2.531, 0.314, 6.949, 29.822, 6.425, 0.264, 13.905, 54.134, 11.125},
        {0.164, 0.429, 1.484, 0.441, 0.192, 1.718, 5.084, 1.506, 0.174, 3.480,
         15.491, 3.675, 0.138, 3.629, 19.597, 3.862, 0.173, 4.592, 28.753, 4.315},
        {0.118, 0.584, 1.696, 0.490, 0.120, 0.843, 4.486, 1.051, 0.152, 2.951,
         12.854, 2.852, 0.192, 6.005, 22.003, 5.066, 0.295, 9.920, 36.080, 8.145},
    };
    const std::vector<std::string> methods = {"Proj-GAN", "TAC-GAN*", "f-cGAN", "P2GAN"};
    const double expected[4] = {2.85, 2.90, 2.30, 1.95};

    std::vector<std::string> settings;
    std::vector<std::vector<double>> metric(4);
    for (int block = 0; block < 2; ++block)
        for (int s = 0; s < 20; ++s) {
            settings.push_back((block ? "hinge:" : "bce:") + std::to_string(s));
            for (int m = 0; m < 4; ++m)
                metric[m].push_back(block ? kHinge[m][s] : kBce[m][s]);
        }

    const RankTable table = rank_methods(methods, settings, metric);
    bool ok = true;
    std::ostringstream os;
    os << "computed overall ranks:";
    for (int m = 0; m < 4; ++m) {
        os << " " << methods[m] << "=" << table.average[m] << " (published " << expected[m]
           << ")";
        if (std::abs(table.average[m] - expected[m]) > 0.01) ok = false;
    }
    c.pass = ok;
    c.detail = os.str();
    return c;
}

// ---- criterion 5: determinism -------------------------------------------------

Criterion criterion5() {
    Criterion c;
    c.name = "byte-identical reruns; sweep independent of parallelism";

    TrainConfig cfg;
    cfg.variant = parse_variant("p2gan-ap");
    cfg.d_m = 2.0;
    cfg.batch_size = 32;
    cfg.iterations = 60;
    cfg.eval_every = 30;
    cfg.eval_samples = 100;
    cfg.seed = 123;
    const std::string a =
        strip_json_field(run_result_to_json(train_run(cfg)), "wall_clock_seconds");
    const std::string b =
        strip_json_field(run_result_to_json(train_run(cfg)), "wall_clock_seconds");
    if (a != b) {
        c.detail = "rerun of one config differed";
        return c;
    }

    auto small_sweep = [](const std::string& dir, int parallelism) {
        SweepConfig s;
        s.methods = {"projgan", "fcgan:reverse-kl"};
        s.activations = {"bce", "hinge"};
        s.d_m_values = {1.0};
        s.runs_per_setting = 2;
        s.base_seed = 11;
        s.parallelism = parallelism;
        s.output_dir = dir;
        s.base.batch_size = 16;
        s.base.iterations = 20;
        s.base.eval_every = 20;
        s.base.eval_samples = 50;
        return s;
    };
    fs::remove_all("p2bench_acceptance/det1");
    fs::remove_all("p2bench_acceptance/det4");
    run_sweep(small_sweep("p2bench_acceptance/det1", 1));
    run_sweep(small_sweep("p2bench_acceptance/det4", 4));

    for (const auto& e : fs::directory_iterator("p2bench_acceptance/det1")) {
        const std::string name = e.path().filename().string();
        const std::string one =
            strip_json_field(read_file(e.path().string()), "wall_clock_seconds");
        const std::string four = strip_json_field(
            read_file("p2bench_acceptance/det4/" + name), "wall_clock_seconds");
        if (one != four) {
            c.detail = "parallel sweep differs on " + name;
            return c;
        }
    }
    c.pass = true;
    c.detail = "single-run rerun and 1-vs-4-worker sweeps byte-identical";
    return c;
}

// ---- criterion 6: every variant trains ----------------------------------------

Criterion criterion6() {
    Criterion c;
    c.name = "all 15 variants x 2 activations train without blowup and improve";
    const auto t0 = std::chrono::steady_clock::now();

    SweepConfig sweep;
    for (VariantKind k : kAllVariantKinds) {
        LossVariant v;
        v.kind = k;
        if (k == VariantKind::FCGAN) v.fdiv = FDivergenceKind::ReverseKL;
        if (k == VariantKind::P2GAN_D) v.decay_T = 500.0;
        sweep.methods.push_back(v.name());
    }
    sweep.activations = {"bce", "hinge"};
    sweep.d_m_values = {2.0};
    sweep.runs_per_setting = 1;
    sweep.base_seed = 3;
    sweep.parallelism = worker_count();
    sweep.output_dir = "p2bench_acceptance/variants";
    sweep.base.iterations = 1500;
    sweep.base.eval_every = 1500;
    sweep.base.eval_samples = 1000;

    const SweepOutcome outcome = run_sweep(sweep);
    if (outcome.failed > 0) {
        c.detail = std::to_string(outcome.failed) +
                   " variants aborted, first: " + outcome.failures.front();
        return c;
    }

    int improved = 0, total = 0;
    std::string not_improved;
    for (const auto& e : fs::directory_iterator(sweep.output_dir)) {
        if (e.path().extension() != ".json") continue;
        const RunResult r = run_result_from_json(read_file(e.path().string()));
        ++total;
        if (r.finals.mmd_marginal < r.initial.mmd_marginal)
            ++improved;
        else if (not_improved.empty())
            not_improved = r.variant + "/" + r.activation;
    }
    c.pass = total == 30 && improved == total;
    std::ostringstream os;
    os << improved << "/" << total << " runs improved over iteration 0; " << seconds_since(t0)
       << " s";
    if (!not_improved.empty()) os << "; first non-improver: " << not_improved;
    c.detail = os.str();
    return c;
}

}  // namespace

int main() {
    fs::create_directories("p2bench_acceptance");
    std::vector<Criterion> results;
    results.push_back(criterion1());
    results.push_back(criterion2());
    results.push_back(criterion3());
    results.push_back(criterion4());
    results.push_back(criterion5());
    results.push_back(criterion6());

    int failed = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const Criterion& c = results[i];
        std::printf("[%s] criterion %zu: %s - %s\n", c.pass ? "PASS" : "FAIL", i + 1,
                    c.name.c_str(), c.detail.c_str());
        if (!c.pass) ++failed;
    }
    std::printf("%zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}
