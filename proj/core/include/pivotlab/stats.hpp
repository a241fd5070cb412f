// Small statistics helpers for experiment aggregates.
#pragma once

#include <cstdint>
#include <vector>

namespace pivotlab {

/// Linear-interpolation quantile (the "type 7" rule) of unsorted data.
/// Throws std::invalid_argument on empty input or q outside [0, 1].
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

struct BinomialInterval {
    double lower = 0.0;
    double upper = 1.0;
};

/// Exact two-sided Clopper-Pearson interval at confidence 1 - alpha.
BinomialInterval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double alpha = 0.05);

/// Exact one-sided upper bound at confidence 1 - alpha.
double clopper_pearson_upper(std::uint64_t successes, std::uint64_t trials, double alpha);

}  // namespace pivotlab
