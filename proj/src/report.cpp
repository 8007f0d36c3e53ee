#include "p2bench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>

#include "p2bench/io.hpp"
#include "p2bench/mog.hpp"

namespace p2bench {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

const char* kColumns[] = {"0", "1", "2", "M", "FIDmax"};

double column_value(const RunResult& r, const std::string& column) {
    if (column == "0") return r.finals.mmd_class[0];
    if (column == "1") return r.finals.mmd_class[1];
    if (column == "2") return r.finals.mmd_class[2];
    if (column == "M") return r.finals.mmd_marginal;
    if (column == "FIDmax") return r.finals.fid_max;
    throw std::invalid_argument("unknown column " + column);
}

// MMD rank tables for one activation (or pooled "overall" settings)
void add_rank_table(ReportBundle& bundle, const std::string& label,
                    const std::vector<std::pair<std::string, double>>& act_dm,
                    const std::vector<std::string>& methods) {
    if (methods.size() < 2 || act_dm.empty()) return;
    std::vector<std::string> setting_names;
    std::vector<std::vector<double>> metric(methods.size());
    for (const auto& [act, d_m] : act_dm) {
        for (const char* col : {"0", "1", "2", "M"}) {
            std::ostringstream name;
            name << act << ":dm=" << d_m << ":" << col;
            setting_names.push_back(name.str());
            for (std::size_t m = 0; m < methods.size(); ++m) {
                SettingKey key{methods[m], act, d_m};
                const auto it = bundle.settings.find(key);
                if (it == bundle.settings.end()) return;  // incomplete grid, skip table
                metric[m].push_back(it->second.values.at(col));
            }
        }
    }
    bundle.rank_tables[label] = rank_methods(methods, setting_names, metric);
}

void write_values_csv(const ReportBundle& bundle, const std::string& path) {
    std::ostringstream os;
    os << "method,activation,d_m,column,value,n_runs\n";
    for (const auto& [key, agg] : bundle.settings)
        for (const char* col : kColumns)
            os << key.method << "," << key.activation << "," << fmt(key.d_m) << "," << col << ","
               << fmt(agg.values.at(col)) << "," << agg.n_runs << "\n";
    write_file_atomic(path, os.str());
}

void write_rank_csv(const RankTable& table, const std::string& path) {
    std::ostringstream os;
    os << "method";
    for (const std::string& s : table.settings) os << "," << s;
    os << ",average\n";
    for (std::size_t m = 0; m < table.methods.size(); ++m) {
        os << table.methods[m];
        for (double r : table.ranks[m]) os << "," << fmt(r);
        os << "," << fmt(table.average[m]) << "\n";
    }
    write_file_atomic(path, os.str());
}

// histogram of generated samples over the true marginal density
void write_histogram_svg(const SettingKey& key, const SettingAggregate& agg,
                         const std::string& path) {
    const MoGSpec spec = make_spec(key.d_m);
    GeneratorParams gen = generator_from_json(agg.best_generator_json);

    const std::size_t n = 10000;
    Rng rng(mix_seed(agg.best_seed, 0x51D));
    Tensor z(n, gen.noise.dim);
    for (double& v : z.data) v = rng.normal();
    std::vector<int> labels(n);
    for (int& y : labels) y = rng.uniform_int(static_cast<int>(spec.num_classes()));
    const std::vector<double> samples = generate_values(gen, z, labels);

    const double lo = spec.means.front() - 4.0 * spec.stds.back();
    const double hi = spec.means.back() + 4.0 * spec.stds.back();
    const int bins = 120;
    std::vector<double> hist(bins, 0.0);
    const double bw = (hi - lo) / bins;
    int inside = 0;
    for (double x : samples) {
        const int b = static_cast<int>((x - lo) / bw);
        if (b >= 0 && b < bins) {
            hist[b] += 1.0;
            ++inside;
        }
    }
    // density normalization over the clipped range
    const double norm = inside > 0 ? 1.0 / (static_cast<double>(samples.size()) * bw) : 0.0;
    for (double& h : hist) h *= norm;

    double ymax = 0.0;
    for (double h : hist) ymax = std::max(ymax, h);
    const int grid = 400;
    std::vector<double> density(grid);
    for (int i = 0; i < grid; ++i) {
        const double x = lo + (hi - lo) * i / (grid - 1);
        density[i] = marginal_pdf(spec, x);
        ymax = std::max(ymax, density[i]);
    }
    if (ymax <= 0.0) ymax = 1.0;

    const double W = 640.0, H = 360.0, mx = 40.0, my = 20.0;
    auto px = [&](double x) { return mx + (x - lo) / (hi - lo) * (W - 2 * mx); };
    auto py = [&](double y) { return H - my - y / (1.1 * ymax) * (H - 2 * my); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int b = 0; b < bins; ++b) {
        if (hist[b] <= 0.0) continue;
        const double x0 = px(lo + b * bw);
        const double x1 = px(lo + (b + 1) * bw);
        const double y = py(hist[b]);
        os << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(x1 - x0)
           << "\" height=\"" << fmt(H - my - y) << "\" fill=\"#7aa6d6\" fill-opacity=\"0.7\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"#c23b22\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i < grid; ++i) {
        const double x = lo + (hi - lo) * i / (grid - 1);
        os << fmt(px(x)) << "," << fmt(py(density[i])) << " ";
    }
    os << "\"/>\n";
    os << "<line x1=\"" << fmt(mx) << "\" y1=\"" << fmt(H - my) << "\" x2=\"" << fmt(W - mx)
       << "\" y2=\"" << fmt(H - my) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(mx) << "\" y=\"14\" font-size=\"12\">" << key.method << " / "
       << key.activation << " / d_m=" << fmt(key.d_m) << "</text>\n";
    os << "</svg>\n";
    write_file_atomic(path, os.str());
}

}  // namespace

ReportBundle aggregate_results(const std::vector<RunResult>& runs, double top_fraction) {
    if (runs.empty()) throw std::invalid_argument("report: no run results");
    ReportBundle bundle;

    std::map<SettingKey, std::vector<const RunResult*>> groups;
    for (const RunResult& r : runs) groups[{r.variant, r.activation, r.d_m}].push_back(&r);

    for (auto& [key, members] : groups) {
        SettingAggregate agg;
        agg.n_runs = static_cast<int>(members.size());
        for (const char* col : kColumns) {
            std::vector<double> vals;
            vals.reserve(members.size());
            for (const RunResult* r : members) vals.push_back(column_value(*r, col));
            agg.values[col] = top_fraction_mean(vals, top_fraction);
        }
        const RunResult* best = members.front();
        for (const RunResult* r : members)
            if (r->finals.mmd_marginal < best->finals.mmd_marginal) best = r;
        agg.best_seed = best->seed;
        agg.best_generator_json = best->generator_json;
        agg.best_marginal = best->finals.mmd_marginal;
        bundle.settings.emplace(key, std::move(agg));
    }

    // collect the grid axes
    std::set<std::string> methods_set, acts_set;
    std::set<double> dms_set;
    for (const auto& [key, agg] : bundle.settings) {
        methods_set.insert(key.method);
        acts_set.insert(key.activation);
        dms_set.insert(key.d_m);
    }
    const std::vector<std::string> methods(methods_set.begin(), methods_set.end());

    std::vector<std::pair<std::string, double>> all_settings;
    for (const std::string& act : acts_set) {
        std::vector<std::pair<std::string, double>> act_settings;
        for (double d_m : dms_set) {
            act_settings.push_back({act, d_m});
            all_settings.push_back({act, d_m});
        }
        add_rank_table(bundle, act, act_settings, methods);
    }
    add_rank_table(bundle, "overall", all_settings, methods);
    return bundle;
}

ReportBundle build_report(const std::string& results_dir, const std::string& out_dir,
                          double top_fraction) {
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(results_dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().extension() != ".json") continue;
        paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());

    std::vector<RunResult> runs;
    for (const std::string& path : paths) {
        try {
            runs.push_back(run_result_from_json(read_file(path)));
        } catch (const std::exception&) {
            // non-result JSON (configs, failure markers) is ignored
        }
    }
    if (runs.empty())
        throw std::invalid_argument("report: no parseable run results in " + results_dir);

    ReportBundle bundle = aggregate_results(runs, top_fraction);

    fs::create_directories(out_dir);
    const std::string values_path = (fs::path(out_dir) / "values.csv").string();
    write_values_csv(bundle, values_path);
    bundle.files_written.push_back(values_path);
    for (const auto& [label, table] : bundle.rank_tables) {
        const std::string path = (fs::path(out_dir) / ("rank_" + label + ".csv")).string();
        write_rank_csv(table, path);
        bundle.files_written.push_back(path);
    }
    for (const auto& [key, agg] : bundle.settings) {
        if (agg.best_generator_json.empty()) continue;
        std::string name = run_filename(key.method, key.activation, key.d_m, 0);
        name = name.substr(0, name.size() - 7);  // drop "_0.json"
        const std::string path = (fs::path(out_dir) / (name + ".svg")).string();
        write_histogram_svg(key, agg, path);
        bundle.files_written.push_back(path);
    }
    return bundle;
}

}  // namespace p2bench
