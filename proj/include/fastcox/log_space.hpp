#pragma once

#include <limits>
#include <span>
#include <vector>

namespace fastcox {

// Streaming log-sum-exp with a running maximum. After adding x_1..x_k,
// value() == log(sum_j exp(x_j)); no intermediate exponential exceeds 1.
class LogSumExpAccumulator {
public:
    void add(double x) noexcept;

    // -inf when nothing has been added.
    double value() const noexcept;

    bool empty() const noexcept { return max_ == -std::numeric_limits<double>::infinity(); }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double scaled_sum_ = 0.0;  // sum_j exp(x_j - max_)
};

// out[k] = log(sum_{j <= k} exp(values[j])).
// Throws InvalidInput on non-finite entries.
std::vector<double> log_cum_sum_exp(std::span<const double> values);

// log(exp(a) - weight * exp(b)) evaluated as a + log1p(-weight * exp(b - a)).
// weight must lie in [0, 1]. Throws NumericalDomain if the difference is not
// strictly positive.
double log_diff_exp(double a, double weight, double b);

}  // namespace fastcox
