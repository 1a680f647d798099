#include "lagco/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lagco/rng.hpp"

namespace lagco::eval {

double iqm(std::vector<double> scores) {
    if (scores.empty()) throw std::invalid_argument("iqm: empty input");
    std::sort(scores.begin(), scores.end());
    double n = static_cast<double>(scores.size());
    double lo = n / 4.0, hi = 3.0 * n / 4.0;
    double weighted = 0.0, weight = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        // overlap of [i, i+1) with [lo, hi]
        double w = std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
        if (w <= 0.0) continue;
        weighted += w * scores[i];
        weight += w;
    }
    return weighted / weight;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile: empty input");
    std::sort(values.begin(), values.end());
    double idx = q / 100.0 * static_cast<double>(values.size() - 1);
    size_t lo = static_cast<size_t>(std::floor(idx));
    size_t hi = static_cast<size_t>(std::ceil(idx));
    double frac = idx - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::pair<double, double> bootstrap_ci(const std::vector<double>& scores, double level,
                                       int resamples, uint64_t seed) {
    if (scores.empty()) throw std::invalid_argument("bootstrap_ci: empty input");
    Rng rng(seed);
    std::vector<double> stat(static_cast<size_t>(resamples));
    std::vector<double> resample(scores.size());
    for (int r = 0; r < resamples; ++r) {
        for (auto& v : resample)
            v = scores[static_cast<size_t>(
                rng.uniform_int(0, static_cast<int64_t>(scores.size()) - 1))];
        stat[static_cast<size_t>(r)] = iqm(resample);
    }
    double tail = (1.0 - level) / 2.0 * 100.0;
    return {percentile(stat, tail), percentile(stat, 100.0 - tail)};
}

SpreadStats spread_stats(const std::vector<double>& scores) {
    if (scores.empty()) throw std::invalid_argument("spread_stats: empty input");
    SpreadStats out;
    for (double v : scores) out.mean += v;
    out.mean /= static_cast<double>(scores.size());
    out.lower = out.mean - percentile(scores, 16.0);
    out.upper = percentile(scores, 84.0) - out.mean;
    return out;
}

PowerLawFit fit_power_law(const std::vector<double>& sizes, const std::vector<double>& times) {
    if (sizes.size() != times.size() || sizes.size() < 3)
        throw std::invalid_argument("fit_power_law: need at least 3 (size, time) pairs");
    for (size_t i = 0; i < sizes.size(); ++i)
        if (sizes[i] <= 0.0 || times[i] <= 0.0)
            throw std::invalid_argument("fit_power_law: sizes and times must be positive");
    size_t n = sizes.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        double x = std::log(sizes[i]), y = std::log(times[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = static_cast<double>(n) * sxx - sx * sx;
    if (std::abs(denom) < 1e-9 * std::max(1.0, static_cast<double>(n) * sxx))
        throw std::invalid_argument("fit_power_law: needs distinct sizes");
    PowerLawFit fit;
    fit.alpha = (static_cast<double>(n) * sxy - sx * sy) / denom;
    double intercept = (sy - fit.alpha * sx) / static_cast<double>(n);
    fit.c = std::exp(intercept);
    double ss_res = 0, ss_tot = 0, mean_y = sy / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
        double x = std::log(sizes[i]), y = std::log(times[i]);
        double pred = intercept + fit.alpha * x;
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace lagco::eval
