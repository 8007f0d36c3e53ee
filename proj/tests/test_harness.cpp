#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "p2bench/io.hpp"
#include "p2bench/report.hpp"
#include "p2bench/sweep.hpp"
#include "p2bench/trainer.hpp"

using namespace p2bench;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / ("p2bench_test_" + name);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SweepConfig tiny_sweep(const std::string& dir) {
    SweepConfig s;
    s.methods = {"projgan", "p2gan"};
    s.activations = {"bce"};
    s.d_m_values = {1.0, 2.0};
    s.runs_per_setting = 3;
    s.base_seed = 100;
    s.output_dir = dir;
    s.base.batch_size = 16;
    s.base.iterations = 10;
    s.base.eval_every = 10;
    s.base.eval_samples = 50;
    return s;
}

}  // namespace

TEST_CASE("train config json round-trips with defaults") {
    const std::string text = R"({"variant": "fcgan:kl", "activation": "hinge", "d_m": 2.5,
                                 "iterations": 120, "seed": 3})";
    const TrainConfig c = train_config_from_json(text);
    CHECK(c.variant.kind == VariantKind::FCGAN);
    CHECK(c.variant.fdiv == FDivergenceKind::KL);
    CHECK(c.variant.activation == ActivationKind::Hinge);
    CHECK(c.d_m == 2.5);
    CHECK(c.iterations == 120);
    CHECK(c.eval_every == 120);  // clamped default
    CHECK(c.batch_size == 128);
    CHECK(c.optimizer.lr == 2e-4);
    CHECK(c.kernel.bandwidths.size() == 6);

    const TrainConfig back = train_config_from_json(train_config_to_json(c));
    CHECK(train_config_to_json(back) == train_config_to_json(c));
    CHECK(config_digest(back) == config_digest(c));
}

TEST_CASE("config errors name the offending field") {
    CHECK_THROWS_WITH_AS(train_config_from_json(R"({"variant": "zzz"})"),
                         doctest::Contains("variant"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(train_config_from_json(R"({"variant": "p2gan", "batch_sz": 4})"),
                         doctest::Contains("batch_sz"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(train_config_from_json(R"({"variant": "p2gan", "activation": "relu"})"),
                         doctest::Contains("activation"), std::invalid_argument);
    CHECK_THROWS_AS(train_config_from_json("not json"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(train_config_from_json(R"({})"), doctest::Contains("variant"),
                         std::invalid_argument);
}

TEST_CASE("run result json round-trips") {
    TrainConfig c;
    c.variant = parse_variant("p2gan");
    c.d_m = 1.0;
    c.batch_size = 8;
    c.iterations = 4;
    c.eval_every = 2;
    c.eval_samples = 40;
    c.seed = 5;
    const RunResult r = train_run(c);
    const std::string text = run_result_to_json(r);
    const RunResult back = run_result_from_json(text);
    CHECK(run_result_to_json(back) == text);
    CHECK(back.history.size() == r.history.size());
    CHECK(back.config_digest == r.config_digest);
}

TEST_CASE("sweep writes one self-describing file per run and resumes") {
    TempDir dir("sweep");
    SweepConfig s = tiny_sweep(dir.path.string());
    const SweepOutcome first = run_sweep(s);
    CHECK(first.completed == 12);
    CHECK(first.failed == 0);

    int files = 0;
    for (const auto& e : fs::directory_iterator(dir.path))
        if (e.path().extension() == ".json") ++files;
    CHECK(files == 12);

    // resume: everything skipped
    const SweepOutcome second = run_sweep(s);
    CHECK(second.completed == 0);
    CHECK(second.skipped == 12);

    // a config change is refused rather than silently mixed in
    SweepConfig changed = s;
    changed.base.iterations = 11;
    changed.base.eval_every = 11;
    const SweepOutcome third = run_sweep(changed);
    CHECK(third.failed == 12);
}

TEST_CASE("sweep results are independent of parallelism") {
    TempDir dir1("par1");
    TempDir dir2("par2");
    SweepConfig a = tiny_sweep(dir1.path.string());
    a.runs_per_setting = 2;
    SweepConfig b = tiny_sweep(dir2.path.string());
    b.runs_per_setting = 2;
    b.parallelism = 4;

    run_sweep(a);
    run_sweep(b);
    for (const auto& e : fs::directory_iterator(dir1.path)) {
        const std::string name = e.path().filename().string();
        const std::string ja =
            strip_json_field(read_file(e.path().string()), "wall_clock_seconds");
        const std::string jb =
            strip_json_field(read_file((dir2.path / name).string()), "wall_clock_seconds");
        CHECK(ja == jb);
    }
}

TEST_CASE("report aggregates, ranks, and is a pure function of its input") {
    TempDir dir("report");
    SweepConfig s = tiny_sweep(dir.path.string());
    run_sweep(s);

    const std::string out1 = (dir.path / "rep1").string();
    const std::string out2 = (dir.path / "rep2").string();
    const ReportBundle b1 = build_report(dir.path.string(), out1);
    const ReportBundle b2 = build_report(dir.path.string(), out2);

    // 2 methods x 1 activation x 2 d_m cells, 5 columns each
    CHECK(b1.settings.size() == 4);
    for (const auto& [key, agg] : b1.settings) {
        CHECK(agg.n_runs == 3);
        CHECK(agg.values.size() == 5);
    }
    REQUIRE(b1.rank_tables.count("bce") == 1);
    REQUIRE(b1.rank_tables.count("overall") == 1);
    const RankTable& rt = b1.rank_tables.at("bce");
    CHECK(rt.settings.size() == 8);  // 2 d_m x 4 MMD columns

    const std::string csv1 = read_file(out1 + "/values.csv");
    const std::string csv2 = read_file(out2 + "/values.csv");
    CHECK(csv1 == csv2);
    CHECK(read_file(out1 + "/rank_bce.csv") == read_file(out2 + "/rank_bce.csv"));

    // header plus 4 settings x 5 columns rows
    CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 21);

    int svgs = 0;
    for (const auto& e : fs::directory_iterator(out1))
        if (e.path().extension() == ".svg") ++svgs;
    CHECK(svgs == 4);

    CHECK_THROWS(build_report((dir.path / "empty").string(), out1));
}

TEST_CASE("aggregate_results applies the top-90% rule per column") {
    std::vector<RunResult> runs;
    for (int i = 0; i < 10; ++i) {
        RunResult r;
        r.variant = "p2gan";
        r.activation = "bce";
        r.d_m = 1.0;
        r.seed = i;
        r.finals.mmd_class = {1.0 + i, 2.0 + i, 3.0 + i};
        r.finals.mmd_marginal = static_cast<double>(i + 1);  // 1..10
        r.finals.fid_max = 10.0 - i;
        runs.push_back(r);
    }
    const ReportBundle b = aggregate_results(runs);
    const SettingAggregate& agg = b.settings.begin()->second;
    CHECK(agg.values.at("M") == doctest::Approx(5.0).epsilon(1e-12));  // mean of 1..9
    CHECK(agg.values.at("FIDmax") == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(agg.n_runs == 10);
    CHECK(agg.best_seed == 0);  // lowest marginal
}

TEST_CASE("run filenames are filesystem-safe") {
    CHECK(run_filename("fcgan:reverse-kl", "bce", 1.0, 7) == "fcgan-reverse-kl_bce_1_7.json");
    CHECK(run_filename("p2gan-d:200", "hinge", 2.5, 3) == "p2gan-d-200_hinge_2.5_3.json");
}
