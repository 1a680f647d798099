#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace lagco::eval {

// Interquartile mean with fractional trimming: linear weights at the quartile
// boundaries keep it well-defined when n is not divisible by 4.
double iqm(std::vector<double> scores);

// percentile via linear interpolation over the sorted sample, q in [0, 100]
double percentile(std::vector<double> values, double q);

// percentile bootstrap interval of the IQM statistic
std::pair<double, double> bootstrap_ci(const std::vector<double>& scores, double level = 0.95,
                                       int resamples = 10000, uint64_t seed = 0);

struct SpreadStats {
    double mean = 0.0;
    double lower = 0.0;  // mean - 16th percentile
    double upper = 0.0;  // 84th percentile - mean
};
SpreadStats spread_stats(const std::vector<double>& scores);

struct PowerLawFit {
    double c = 0.0;      // prefactor
    double alpha = 0.0;  // exponent
    double r2 = 0.0;     // of the log-log fit
};
// least squares of log T against log n; sizes and times must be positive
PowerLawFit fit_power_law(const std::vector<double>& sizes, const std::vector<double>& times);

}  // namespace lagco::eval
