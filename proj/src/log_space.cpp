#include "fastcox/log_space.hpp"

#include <cmath>
#include <string>

#include "fastcox/errors.hpp"

namespace fastcox {

void LogSumExpAccumulator::add(double x) noexcept {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x <= max_) {
        scaled_sum_ += std::exp(x - max_);
    } else {
        scaled_sum_ = scaled_sum_ * std::exp(max_ - x) + 1.0;
        max_ = x;
    }
}

double LogSumExpAccumulator::value() const noexcept {
    if (empty()) return max_;
    return max_ + std::log(scaled_sum_);
}

std::vector<double> log_cum_sum_exp(std::span<const double> values) {
    std::vector<double> out(values.size());
    LogSumExpAccumulator acc;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) {
            throw InvalidInput("log_cum_sum_exp: non-finite value at index " + std::to_string(k));
        }
        acc.add(values[k]);
        out[k] = acc.value();
    }
    return out;
}

double log_diff_exp(double a, double weight, double b) {
    if (!(weight >= 0.0 && weight <= 1.0)) {
        throw InvalidInput("log_diff_exp: weight must lie in [0, 1]");
    }
    if (weight == 0.0) return a;
    const double ratio = weight * std::exp(b - a);
    if (!(ratio < 1.0)) {
        throw NumericalDomain("log_diff_exp: exp(a) - w*exp(b) is not positive");
    }
    return a + std::log1p(-ratio);
}

}  // namespace fastcox
