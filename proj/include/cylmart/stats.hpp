#pragma once

#include <vector>

namespace cylmart {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
};

MeanSe mean_se(const std::vector<double>& xs);

// Pearson correlation of paired samples.
double correlation(const std::vector<double>& xs, const std::vector<double>& ys);

// Standard normal CDF.
double normal_cdf(double x);

// Kolmogorov-Smirnov test of a sample against the standard normal law.
struct KsResult {
    double statistic = 0.0;  // sup |F_n - Phi|
    double p_value = 1.0;
};
KsResult ks_normal_test(std::vector<double> sample);

}  // namespace cylmart
