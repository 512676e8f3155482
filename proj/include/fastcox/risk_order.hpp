#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fastcox/types.hpp"

namespace fastcox {

// A maximal run of sorted positions [begin, end) sharing one duration.
struct TieGroup {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t deaths = 0;  // uncensored members

    std::size_t size() const noexcept { return end - begin; }
    std::size_t last() const noexcept { return end - 1; }
};

// Samples sorted by strictly decreasing duration, ties broken by original
// index ascending. The risk set of the group containing position p is the
// prefix [0, group.end): everything with duration >= that group's duration.
// Immutable after construction; may be shared across threads.
class RiskOrder {
public:
    RiskOrder(std::span<const double> durations, EventView events);

    std::size_t size() const noexcept { return perm_.size(); }

    // perm()[p] is the original index of the sample at sorted position p.
    const std::vector<std::size_t>& perm() const noexcept { return perm_; }
    // Position of original sample i in the sorted order.
    std::size_t position_of(std::size_t i) const { return position_[i]; }

    const std::vector<double>& sorted_durations() const noexcept { return sorted_durations_; }
    const EventFlags& sorted_events() const noexcept { return sorted_events_; }

    const std::vector<TieGroup>& groups() const noexcept { return groups_; }
    // Index into groups() for each sorted position.
    std::size_t group_of(std::size_t pos) const { return group_of_[pos]; }
    // First sorted position sharing the duration at pos.
    std::size_t group_start(std::size_t pos) const { return groups_[group_of_[pos]].begin; }

    // Sorted positions of uncensored samples (ascending).
    const std::vector<std::size_t>& death_positions() const noexcept { return death_positions_; }
    // Indices into groups() of the groups with at least one death (ascending).
    const std::vector<std::size_t>& death_groups() const noexcept { return death_groups_; }

    std::size_t event_count() const noexcept { return death_positions_.size(); }
    bool has_ties() const noexcept { return groups_.size() != perm_.size(); }
    // True if some tie group holds two or more deaths.
    bool has_tied_deaths() const noexcept;

    // Gathers values given in original sample order into sorted order.
    std::vector<double> to_sorted(std::span<const double> original) const;
    // Scatters values given in sorted order back to original sample order.
    std::vector<double> to_original(std::span<const double> sorted) const;

private:
    std::vector<std::size_t> perm_;
    std::vector<std::size_t> position_;
    std::vector<double> sorted_durations_;
    EventFlags sorted_events_;
    std::vector<TieGroup> groups_;
    std::vector<std::size_t> group_of_;
    std::vector<std::size_t> death_positions_;
    std::vector<std::size_t> death_groups_;
};

RiskOrder build_risk_order(std::span<const double> durations, EventView events);

}  // namespace fastcox
