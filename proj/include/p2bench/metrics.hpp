#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace p2bench {

// Gaussian RBF mixture k(x, y) = sum_s exp(-(x-y)^2 / (2 s^2)).
struct KernelSpec {
    std::vector<double> bandwidths{0.1, 0.5, 1.0, 2.0, 5.0, 10.0};

    void validate() const;
};

enum class MmdMode { Biased, Unbiased };

// Squared MMD between two 1-D sample sets. The biased V-statistic is clamped
// at zero; the unbiased U-statistic may be negative.
double mmd2(std::span<const double> a, std::span<const double> b, const KernelSpec& kernel,
            MmdMode mode);

struct GaussianFit {
    double mu = 0.0;
    double sigma = 0.0;  // population MLE, divide by n
};

GaussianFit fit_gaussian(std::span<const double> samples);

// Mean of the ceil(fraction * n) smallest values (smaller = better run).
double top_fraction_mean(std::vector<double> values, double fraction);

struct RankTable {
    std::vector<std::string> methods;
    std::vector<std::string> settings;
    // ranks[m][s]: rank of method m in setting s; ties share the average rank
    std::vector<std::vector<double>> ranks;
    std::vector<double> average;  // per method, over settings
};

// metric[m][s]: value of method m in setting s; rank 1 = smallest.
RankTable rank_methods(const std::vector<std::string>& methods,
                       const std::vector<std::string>& settings,
                       const std::vector<std::vector<double>>& metric);

}  // namespace p2bench
