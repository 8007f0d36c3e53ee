#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "p2bench/io.hpp"
#include "p2bench/report.hpp"
#include "p2bench/sweep.hpp"
#include "p2bench/trainer.hpp"
#include "p2bench/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

void print_metrics(const p2bench::MetricBundle& m) {
    std::printf("mmd_class_0 = %.6g\n", m.mmd_class[0]);
    std::printf("mmd_class_1 = %.6g\n", m.mmd_class[1]);
    std::printf("mmd_class_2 = %.6g\n", m.mmd_class[2]);
    std::printf("mmd_marginal = %.6g\n", m.mmd_marginal);
    std::printf("fid_class_0 = %.6g\n", m.fid_class[0]);
    std::printf("fid_class_1 = %.6g\n", m.fid_class[1]);
    std::printf("fid_class_2 = %.6g\n", m.fid_class[2]);
    std::printf("fid_max = %.6g\n", m.fid_max);
    if (m.degenerate_fake) std::printf("degenerate_fake = true\n");
}

std::string history_csv(const p2bench::RunResult& result) {
    std::string out =
        "iteration,mmd_0,mmd_1,mmd_2,mmd_marginal,fid_0,fid_1,fid_2,fid_max,lambda\n";
    char line[256];
    auto row = [&](int iteration, const p2bench::MetricBundle& m, const char* lambda) {
        std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%s\n",
                      iteration, m.mmd_class[0], m.mmd_class[1], m.mmd_class[2], m.mmd_marginal,
                      m.fid_class[0], m.fid_class[1], m.fid_class[2], m.fid_max, lambda);
        out += line;
    };
    row(0, result.initial, "");
    char lam[32];
    for (const p2bench::HistoryEntry& h : result.history) {
        if (h.has_lambda)
            std::snprintf(lam, sizeof(lam), "%.10g", h.lambda);
        else
            lam[0] = '\0';
        row(h.iteration, h.metrics, lam);
    }
    return out;
}

int cmd_run(const std::string& config_path, std::string out_path,
            const std::string& history_path) {
    p2bench::TrainConfig config;
    try {
        config = p2bench::train_config_from_json(p2bench::read_file(config_path));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    }
    try {
        const p2bench::RunResult result = p2bench::train_run(config);
        if (out_path.empty())
            out_path = p2bench::run_filename(result.variant, result.activation, result.d_m,
                                             result.seed);
        p2bench::write_file_atomic(out_path, p2bench::run_result_to_json(result));
        if (!history_path.empty()) p2bench::write_file_atomic(history_path, history_csv(result));
        std::printf("result = %s\n", out_path.c_str());
        print_metrics(result.finals);
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run failed: %s\n", e.what());
        return kExitRunFailure;
    }
}

int cmd_sweep(const std::string& config_path, bool quick, const std::string& out_dir) {
    p2bench::SweepConfig config;
    try {
        if (!config_path.empty())
            config = p2bench::sweep_config_from_json(p2bench::read_file(config_path));
        else if (!quick)
            throw std::invalid_argument("sweep needs --config or --preset quick");
        if (quick) p2bench::apply_quick_preset(config);
        if (!out_dir.empty()) config.output_dir = out_dir;
        config.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    }
    try {
        std::printf("sweep: %zu methods x %zu activations x %zu d_m x %d runs -> %s (%d workers)\n",
                    config.methods.size(), config.activations.size(), config.d_m_values.size(),
                    config.runs_per_setting, config.output_dir.c_str(),
                    p2bench::effective_parallelism(config));
        const p2bench::SweepOutcome outcome = p2bench::run_sweep(config);
        std::printf("completed %d, skipped %d, failed %d\n", outcome.completed, outcome.skipped,
                    outcome.failed);
        for (const std::string& f : outcome.failures)
            std::fprintf(stderr, "failed: %s\n", f.c_str());
        return outcome.failed == 0 ? kExitOk : kExitRunFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "sweep failed: %s\n", e.what());
        return kExitRunFailure;
    }
}

int cmd_report(const std::string& dir, std::string out_dir) {
    try {
        if (out_dir.empty()) out_dir = (std::filesystem::path(dir) / "report").string();
        const p2bench::ReportBundle bundle = p2bench::build_report(dir, out_dir);
        for (const std::string& f : bundle.files_written) std::printf("wrote %s\n", f.c_str());
        for (const auto& [label, table] : bundle.rank_tables) {
            std::printf("average ranks (%s):", label.c_str());
            for (std::size_t m = 0; m < table.methods.size(); ++m)
                std::printf(" %s=%.3f", table.methods[m].c_str(), table.average[m]);
            std::printf("\n");
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "report failed: %s\n", e.what());
        return kExitRunFailure;
    }
}

int cmd_verify() {
    const auto results = p2bench::run_verification();
    int failed = 0;
    for (const p2bench::CheckResult& r : results) {
        std::printf("[%s] %s: %s\n", r.pass ? " ok " : "FAIL", r.name.c_str(), r.detail.c_str());
        if (!r.pass) ++failed;
    }
    std::printf("%zu checks, %d failed\n", results.size(), failed);
    return failed == 0 ? kExitOk : kExitRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional-GAN loss benchmark on 1-D mixtures of Gaussians"};
    app.require_subcommand(1);

    std::string run_config, run_out, run_history;
    CLI::App* run = app.add_subcommand("run", "Train one configuration and write its result JSON");
    run->add_option("--config", run_config, "TrainConfig JSON file")->required();
    run->add_option("--out", run_out, "output path (default derived from the config)");
    run->add_option("--history", run_history, "also write the metric history as CSV");

    std::string sweep_config, sweep_preset, sweep_out;
    CLI::App* sweep = app.add_subcommand("sweep", "Run a methods x activations x d_m grid");
    sweep->add_option("--config", sweep_config, "SweepConfig JSON file");
    sweep->add_option("--preset", sweep_preset, "'quick' for the desk-scale grid")
        ->check(CLI::IsMember({"quick"}));
    sweep->add_option("--out-dir", sweep_out, "override the output directory");

    std::string report_dir, report_out;
    CLI::App* report = app.add_subcommand("report", "Aggregate a results directory");
    report->add_option("--dir", report_dir, "directory of run result JSON files")->required();
    report->add_option("--out", report_out, "report output directory (default <dir>/report)");

    app.add_subcommand("verify", "Run the numerical verification suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    }

    if (run->parsed()) return cmd_run(run_config, run_out, run_history);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_preset == "quick", sweep_out);
    if (report->parsed()) return cmd_report(report_dir, report_out);
    return cmd_verify();
}
