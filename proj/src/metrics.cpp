#include "p2bench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace p2bench {

void KernelSpec::validate() const {
    if (bandwidths.empty()) throw std::invalid_argument("kernel: needs at least one bandwidth");
    for (double s : bandwidths)
        if (s <= 0.0) throw std::invalid_argument("kernel: bandwidths must be positive");
}

namespace {

// Evaluation plan for the RBF mixture at a squared distance d2. When every
// exponent ratio c_k / c_min is a small integer, one exp plus integer powers
// replaces |bandwidths| exp calls; the power chain costs ~1e-12 relative
// error, far below metric noise.
struct KernelEval {
    std::vector<double> coeff;        // c_k = 1 / (2 s_k^2)
    std::vector<unsigned long> ratio; // c_k / c_min, when integer
    double cmin = 0.0;
    bool fast = false;

    explicit KernelEval(const KernelSpec& spec) {
        spec.validate();
        for (double s : spec.bandwidths) coeff.push_back(0.5 / (s * s));
        cmin = *std::min_element(coeff.begin(), coeff.end());
        fast = true;
        for (double c : coeff) {
            const double r = c / cmin;
            const double rr = std::round(r);
            if (std::abs(r - rr) > 1e-9 * rr || rr > 1048576.0) {
                fast = false;
                break;
            }
            ratio.push_back(static_cast<unsigned long>(rr));
        }
    }

    static double ipow(double w, unsigned long e) {
        double r = 1.0;
        while (e) {
            if (e & 1UL) r *= w;
            w *= w;
            e >>= 1UL;
        }
        return r;
    }

    double sum_at(double d2) const {
        double s = 0.0;
        if (fast) {
            const double w = std::exp(-d2 * cmin);
            for (unsigned long r : ratio) s += ipow(w, r);
        } else {
            for (double c : coeff) s += std::exp(-d2 * c);
        }
        return s;
    }
};

// sum over all ordered pairs (i, j): k(a_i, b_j)
double cross_sum(std::span<const double> a, std::span<const double> b, const KernelEval& k) {
    double total = 0.0;
    for (double x : a) {
        double row = 0.0;
        for (double y : b) {
            const double d = x - y;
            row += k.sum_at(d * d);
        }
        total += row;
    }
    return total;
}

// sum over unordered pairs i < j within one set (diagonal excluded)
double within_offdiag_sum(std::span<const double> a, const KernelEval& k) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        double row = 0.0;
        const double x = a[i];
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double d = x - a[j];
            row += k.sum_at(d * d);
        }
        total += row;
    }
    return total;
}

}  // namespace

double mmd2(std::span<const double> a, std::span<const double> b, const KernelSpec& kernel,
            MmdMode mode) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("mmd2: each sample set needs at least 2 points");
    const KernelEval k(kernel);
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());
    const double diag = static_cast<double>(kernel.bandwidths.size());  // k(x, x)

    const double aa_off = within_offdiag_sum(a, k);
    const double bb_off = within_offdiag_sum(b, k);
    const double ab = cross_sum(a, b, k);

    if (mode == MmdMode::Biased) {
        const double t1 = (2.0 * aa_off + n * diag) / (n * n);
        const double t2 = (2.0 * bb_off + m * diag) / (m * m);
        const double t3 = 2.0 * ab / (n * m);
        return std::max(0.0, t1 + t2 - t3);
    }
    const double t1 = 2.0 * aa_off / (n * (n - 1.0));
    const double t2 = 2.0 * bb_off / (m * (m - 1.0));
    const double t3 = 2.0 * ab / (n * m);
    return t1 + t2 - t3;
}

GaussianFit fit_gaussian(std::span<const double> samples) {
    if (samples.size() < 2) throw std::invalid_argument("fit_gaussian: needs at least 2 samples");
    GaussianFit fit;
    const double n = static_cast<double>(samples.size());
    for (double x : samples) fit.mu += x;
    fit.mu /= n;
    double ss = 0.0;
    for (double x : samples) {
        const double d = x - fit.mu;
        ss += d * d;
    }
    fit.sigma = std::sqrt(ss / n);
    return fit;
}

double top_fraction_mean(std::vector<double> values, double fraction) {
    if (values.empty()) throw std::invalid_argument("top_fraction_mean: empty input");
    if (fraction <= 0.0 || fraction > 1.0)
        throw std::invalid_argument("top_fraction_mean: fraction must be in (0, 1]");
    // nudge below the product so ceil(0.9 * 10) is 9 despite 9.0000000000000018
    std::size_t keep = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(values.size()) - 1e-9));
    if (keep == 0) keep = 1;
    if (keep > values.size()) keep = values.size();
    std::sort(values.begin(), values.end());
    double s = 0.0;
    for (std::size_t i = 0; i < keep; ++i) s += values[i];
    return s / static_cast<double>(keep);
}

RankTable rank_methods(const std::vector<std::string>& methods,
                       const std::vector<std::string>& settings,
                       const std::vector<std::vector<double>>& metric) {
    const std::size_t nm = methods.size();
    const std::size_t ns = settings.size();
    if (metric.size() != nm) throw std::invalid_argument("rank_methods: row count != methods");
    for (const auto& row : metric)
        if (row.size() != ns)
            throw std::invalid_argument("rank_methods: missing values for some setting");

    RankTable table;
    table.methods = methods;
    table.settings = settings;
    table.ranks.assign(nm, std::vector<double>(ns, 0.0));
    table.average.assign(nm, 0.0);

    std::vector<std::size_t> order(nm);
    for (std::size_t s = 0; s < ns; ++s) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return metric[i][s] < metric[j][s];
        });
        // ties get the average of the rank positions they span
        std::size_t i = 0;
        while (i < nm) {
            std::size_t j = i;
            while (j + 1 < nm && metric[order[j + 1]][s] == metric[order[i]][s]) ++j;
            const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t t = i; t <= j; ++t) table.ranks[order[t]][s] = shared;
            i = j + 1;
        }
    }
    for (std::size_t m = 0; m < nm; ++m) {
        double s = 0.0;
        for (std::size_t j = 0; j < ns; ++j) s += table.ranks[m][j];
        table.average[m] = ns ? s / static_cast<double>(ns) : 0.0;
    }
    return table;
}

}  // namespace p2bench
