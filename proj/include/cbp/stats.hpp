// Small summary-statistics helpers for Monte Carlo output.

#ifndef CBP_STATS_HPP
#define CBP_STATS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cbp {

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double std_err = 0.0; // sample std / sqrt(n)
    double q05 = 0.0, q50 = 0.0, q95 = 0.0;
    std::vector<double> sorted; // empirical CDF handle

    double cdf(double x) const {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
        return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
    }
};

inline SummaryStats summarize(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty input");
    SummaryStats s;
    s.n = values.size();
    double acc = 0.0;
    for (double v : values) acc += v;
    s.mean = acc / static_cast<double>(s.n);
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    var = s.n > 1 ? var / static_cast<double>(s.n - 1) : 0.0;
    s.std_err = std::sqrt(var / static_cast<double>(s.n));
    std::sort(values.begin(), values.end());
    auto q = [&](double p) {
        const std::size_t idx = std::min(
            s.n - 1, static_cast<std::size_t>(p * static_cast<double>(s.n)));
        return values[idx];
    };
    s.q05 = q(0.05);
    s.q50 = q(0.50);
    s.q95 = q(0.95);
    s.sorted = std::move(values);
    return s;
}

struct WilsonInterval {
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// 95% Wilson score interval for a binomial proportion.
inline WilsonInterval wilson95(std::size_t successes, std::size_t trials) {
    if (trials == 0) throw std::invalid_argument("wilson95: zero trials");
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    // endpoints are exact at degenerate counts
    const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {p, lo, hi};
}

} // namespace cbp

#endif // CBP_STATS_HPP
