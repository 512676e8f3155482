#include "fastcox/concordance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fastcox/errors.hpp"

namespace fastcox {
namespace {

void validate(std::span<const double> durations, EventView events, std::span<const double> scores) {
    if (durations.size() != events.size() || durations.size() != scores.size()) {
        throw InvalidInput("c-index: durations, events and scores must have equal length");
    }
    for (std::size_t i = 0; i < durations.size(); ++i) {
        if (std::isnan(durations[i]) || std::isnan(scores[i])) {
            throw InvalidInput("c-index: NaN at index " + std::to_string(i));
        }
    }
}

class FenwickCounter {
public:
    explicit FenwickCounter(std::size_t n) : tree_(n + 1, 0) {}

    void add(std::size_t index) {
        for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }

    // Number of inserted elements with index < end.
    std::uint64_t prefix(std::size_t end) const {
        std::uint64_t total = 0;
        for (std::size_t i = end; i > 0; i -= i & (~i + 1)) total += tree_[i];
        return total;
    }

private:
    std::vector<std::uint64_t> tree_;
};

}  // namespace

double ConcordanceCounts::value(const CIndexOptions& opts) const {
    if (comparable == 0) throw Undefined("concordance undefined: no comparable pairs");
    if (opts.tied_score_credit == 0.0) {
        return static_cast<double>(concordant) / static_cast<double>(comparable);
    }
    if (opts.tied_score_credit == 0.5) {
        return static_cast<double>(2 * concordant + tied_score) /
               (2.0 * static_cast<double>(comparable));
    }
    throw InvalidInput("c-index: tied_score_credit must be 0 or 0.5");
}

ConcordanceCounts concordance_counts_naive(std::span<const double> durations, EventView events,
                                           std::span<const double> scores) {
    validate(durations, events, scores);
    ConcordanceCounts c;
    const std::size_t n = durations.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (!events[j]) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(durations[j] < durations[i])) continue;
            ++c.comparable;
            if (scores[j] > scores[i]) ++c.concordant;
            else if (scores[j] == scores[i]) ++c.tied_score;
        }
    }
    return c;
}

ConcordanceCounts concordance_counts_fast(std::span<const double> durations, EventView events,
                                          std::span<const double> scores) {
    validate(durations, events, scores);
    const std::size_t n = durations.size();

    // Dense ranks; bit-identical scores share a rank.
    std::vector<double> levels(scores.begin(), scores.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        rank[i] = static_cast<std::size_t>(
            std::lower_bound(levels.begin(), levels.end(), scores[i]) - levels.begin());
    }

    std::vector<std::size_t> by_time(n);
    std::iota(by_time.begin(), by_time.end(), std::size_t{0});
    std::stable_sort(by_time.begin(), by_time.end(),
                     [&](std::size_t a, std::size_t b) { return durations[a] < durations[b]; });

    ConcordanceCounts c;
    FenwickCounter inserted(levels.size());
    std::uint64_t total_inserted = 0;
    for (std::size_t begin = 0; begin < n;) {
        std::size_t end = begin;
        while (end < n && durations[by_time[end]] == durations[by_time[begin]]) ++end;

        // Every death already inserted has a strictly smaller duration.
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t r = rank[by_time[k]];
            const std::uint64_t below_or_equal = inserted.prefix(r + 1);
            const std::uint64_t below = inserted.prefix(r);
            c.comparable += total_inserted;
            c.concordant += total_inserted - below_or_equal;
            c.tied_score += below_or_equal - below;
        }
        for (std::size_t k = begin; k < end; ++k) {
            if (events[by_time[k]]) {
                inserted.add(rank[by_time[k]]);
                ++total_inserted;
            }
        }
        begin = end;
    }
    return c;
}

double c_index_naive(std::span<const double> durations, EventView events,
                     std::span<const double> scores, const CIndexOptions& opts) {
    return concordance_counts_naive(durations, events, scores).value(opts);
}

double c_index_fast(std::span<const double> durations, EventView events,
                    std::span<const double> scores, const CIndexOptions& opts) {
    return concordance_counts_fast(durations, events, scores).value(opts);
}

}  // namespace fastcox
