#include "hawkes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/statistics/univariate_statistics.hpp>

namespace hawkes {

double kolmogorov_tail(double x) {
    if (x < 0.2) {
        return 1.0;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) {
        throw std::invalid_argument("ks_test needs a nonempty sample");
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    KsResult r;
    r.statistic = d;
    r.n = sample.size();
    const double sn = std::sqrt(n);
    r.p_value = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
    return r;
}

KsResult ks_test_exponential(std::vector<double> sample) {
    return ks_test(std::move(sample), [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); });
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) {
        return s;
    }
    s.mean = boost::math::statistics::mean(values);
    if (values.size() > 1) {
        s.stddev = std::sqrt(boost::math::statistics::sample_variance(values));
    }
    return s;
}

}  // namespace hawkes
