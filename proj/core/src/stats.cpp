#include "pivotlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

namespace pivotlab {

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty data");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) {
    return quantile(std::move(values), 0.5);
}

BinomialInterval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double alpha) {
    if (trials == 0) throw std::invalid_argument("no trials");
    if (successes > trials) throw std::invalid_argument("more successes than trials");
    const auto k = static_cast<double>(successes);
    const auto n = static_cast<double>(trials);
    BinomialInterval ci;
    if (successes > 0) ci.lower = boost::math::quantile(boost::math::beta_distribution<>(k, n - k + 1), alpha / 2);
    if (successes < trials)
        ci.upper = boost::math::quantile(boost::math::beta_distribution<>(k + 1, n - k), 1 - alpha / 2);
    return ci;
}

double clopper_pearson_upper(std::uint64_t successes, std::uint64_t trials, double alpha) {
    if (trials == 0) throw std::invalid_argument("no trials");
    if (successes >= trials) return 1.0;
    const auto k = static_cast<double>(successes);
    const auto n = static_cast<double>(trials);
    return boost::math::quantile(boost::math::beta_distribution<>(k + 1, n - k), 1 - alpha);
}

}  // namespace pivotlab
