#include "p2bench/mog.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace p2bench {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
}

void MoGSpec::validate() const {
    const std::size_t k = means.size();
    if (k == 0 || stds.size() != k || priors.size() != k)
        throw std::invalid_argument("mog spec: inconsistent component counts");
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (stds[i] <= 0.0) throw std::invalid_argument("mog spec: non-positive std");
        if (priors[i] < 0.0) throw std::invalid_argument("mog spec: negative prior");
        if (i > 0 && means[i] <= means[i - 1])
            throw std::invalid_argument("mog spec: means not strictly increasing");
        s += priors[i];
    }
    if (std::abs(s - 1.0) > 1e-12)
        throw std::invalid_argument("mog spec: priors sum to " + std::to_string(s));
}

MoGSpec make_spec(double d_m) {
    if (d_m <= 0.0) throw std::invalid_argument("make_spec: d_m must be positive");
    MoGSpec spec;
    spec.means = {0.0, d_m, 2.0 * d_m};
    spec.stds = {1.0, 2.0, 3.0};
    spec.priors = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    spec.validate();
    return spec;
}

LabeledBatch sample(const MoGSpec& spec, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("sample: n must be positive");
    LabeledBatch batch;
    batch.xs.resize(n);
    batch.ys.resize(n);
    const std::size_t k = spec.num_classes();
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        double acc = 0.0;
        int y = static_cast<int>(k) - 1;
        for (std::size_t c = 0; c < k; ++c) {
            acc += spec.priors[c];
            if (u < acc) {
                y = static_cast<int>(c);
                break;
            }
        }
        batch.ys[i] = y;
        batch.xs[i] = spec.means[static_cast<std::size_t>(y)] +
                      spec.stds[static_cast<std::size_t>(y)] * rng.normal();
    }
    return batch;
}

double pdf(const MoGSpec& spec, double x, int y) {
    if (y < 0 || static_cast<std::size_t>(y) >= spec.num_classes())
        throw std::invalid_argument("pdf: invalid class " + std::to_string(y));
    const double mu = spec.means[static_cast<std::size_t>(y)];
    const double sd = spec.stds[static_cast<std::size_t>(y)];
    const double z = (x - mu) / sd;
    return kInvSqrt2Pi / sd * std::exp(-0.5 * z * z);
}

double marginal_pdf(const MoGSpec& spec, double x) {
    double s = 0.0;
    for (std::size_t y = 0; y < spec.num_classes(); ++y)
        s += spec.priors[y] * pdf(spec, x, static_cast<int>(y));
    return s;
}

}  // namespace p2bench
