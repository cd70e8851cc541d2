#pragma once

#include <functional>
#include <vector>

namespace hawkes {

struct KsResult {
    double statistic = 0.0;  // sup |F_n - F|
    double p_value = 1.0;    // asymptotic Kolmogorov tail with the small-sample correction
    std::size_t n = 0;
};

// One-sample Kolmogorov-Smirnov test against the continuous cdf.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

// Against Exponential(1).
KsResult ks_test_exponential(std::vector<double> sample);

// P(K > x) for the Kolmogorov distribution.
double kolmogorov_tail(double x);

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for fewer than 2 values
    std::size_t count = 0;
};

Summary summarize(const std::vector<double>& values);

}  // namespace hawkes
