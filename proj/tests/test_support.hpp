#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fastcox/types.hpp"

namespace fastcox::testing {

struct Instance {
    std::vector<double> durations;
    EventFlags events;
    std::vector<double> scores;
};

// Exponential(1) durations, rounded up to a multiple of tie_granularity when
// positive; each sample censored with probability censor_rate; scores
// uniform in [-score_bound, score_bound].
inline Instance random_instance(std::mt19937_64& rng, std::size_t n, double tie_granularity,
                                double censor_rate, double score_bound) {
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> score(-score_bound, score_bound);
    Instance inst;
    for (std::size_t i = 0; i < n; ++i) {
        double t = expo(rng) + 1e-3;
        if (tie_granularity > 0.0) t = std::ceil(t / tie_granularity) * tie_granularity;
        inst.durations.push_back(t);
        inst.events.push_back(unit(rng) >= censor_rate ? 1 : 0);
        inst.scores.push_back(score(rng));
    }
    return inst;
}

// |a - b| <= rel * max(|a|, |b|), or within abs_floor.
inline bool close(double a, double b, double rel, double abs_floor) {
    const double diff = std::abs(a - b);
    return diff <= abs_floor || diff <= rel * std::max(std::abs(a), std::abs(b));
}

// Plain-arithmetic partial likelihood in long double. Finite differences of
// a double-precision loss lose about eps * |nll| / h to cancellation, which
// for n ~ 50 already exceeds 1e-9; this keeps the difference quotient exact
// enough to judge the analytic gradient.
inline long double nll_extended(const std::vector<double>& t, const EventFlags& e, const std::vector<long double>& g,
                                bool efron) {
    const std::size_t n = t.size();
    long double total = 0.0L;
    std::vector<bool> done(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (!e[i] || done[i]) continue;
        long double risk = 0.0L, tied = 0.0L;
        std::vector<std::size_t> deaths;
        for (std::size_t j = 0; j < n; ++j) {
            if (t[j] >= t[i]) risk += std::exp(g[j]);
            if (e[j] && t[j] == t[i]) {
                tied += std::exp(g[j]);
                deaths.push_back(j);
                done[j] = true;
            }
        }
        const long double d = static_cast<long double>(deaths.size());
        for (std::size_t k = 0; k < deaths.size(); ++k) {
            const long double denom = efron ? risk - (static_cast<long double>(k) / d) * tied : risk;
            total += std::log(denom) - g[deaths[k]];
        }
    }
    return total;
}

// Central difference of nll_extended along coordinate i.
inline double central_difference_extended(const std::vector<double>& t, const EventFlags& e,
                                          const std::vector<double>& g, bool efron, std::size_t i, double h) {
    std::vector<long double> x(g.begin(), g.end());
    x[i] = static_cast<long double>(g[i]) + h;
    const long double up = nll_extended(t, e, x, efron);
    x[i] = static_cast<long double>(g[i]) - h;
    const long double down = nll_extended(t, e, x, efron);
    return static_cast<double>((up - down) / (2.0L * h));
}

}  // namespace fastcox::testing
