#include "fastcox/risk_order.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fastcox/errors.hpp"

namespace fastcox {

RiskOrder::RiskOrder(std::span<const double> durations, EventView events) {
    const std::size_t n = durations.size();
    if (n == 0) throw InvalidInput("risk order: at least one sample is required");
    if (events.size() != n) {
        throw InvalidInput("risk order: durations and events differ in length (" +
                           std::to_string(n) + " vs " + std::to_string(events.size()) + ")");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(durations[i])) {
            throw InvalidInput("risk order: non-finite duration at index " + std::to_string(i));
        }
    }

    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    std::sort(perm_.begin(), perm_.end(), [&](std::size_t a, std::size_t b) {
        if (durations[a] != durations[b]) return durations[a] > durations[b];
        return a < b;
    });

    position_.resize(n);
    sorted_durations_.resize(n);
    sorted_events_.resize(n);
    group_of_.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        position_[perm_[p]] = p;
        sorted_durations_[p] = durations[perm_[p]];
        sorted_events_[p] = events[perm_[p]] != 0 ? 1 : 0;
    }

    for (std::size_t p = 0; p < n;) {
        TieGroup g{p, p, 0};
        while (g.end < n && sorted_durations_[g.end] == sorted_durations_[p]) {
            group_of_[g.end] = groups_.size();
            if (sorted_events_[g.end]) {
                death_positions_.push_back(g.end);
                ++g.deaths;
            }
            ++g.end;
        }
        if (g.deaths > 0) death_groups_.push_back(groups_.size());
        groups_.push_back(g);
        p = g.end;
    }
}

bool RiskOrder::has_tied_deaths() const noexcept {
    return std::any_of(groups_.begin(), groups_.end(),
                       [](const TieGroup& g) { return g.deaths >= 2; });
}

std::vector<double> RiskOrder::to_sorted(std::span<const double> original) const {
    if (original.size() != size()) throw InvalidInput("risk order: length mismatch");
    std::vector<double> out(size());
    for (std::size_t p = 0; p < size(); ++p) out[p] = original[perm_[p]];
    return out;
}

std::vector<double> RiskOrder::to_original(std::span<const double> sorted) const {
    if (sorted.size() != size()) throw InvalidInput("risk order: length mismatch");
    std::vector<double> out(size());
    for (std::size_t p = 0; p < size(); ++p) out[perm_[p]] = sorted[p];
    return out;
}

RiskOrder build_risk_order(std::span<const double> durations, EventView events) {
    return RiskOrder(durations, events);
}

}  // namespace fastcox
