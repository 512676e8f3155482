#pragma once

#include <cstdint>
#include <span>

#include "fastcox/types.hpp"

namespace fastcox {

struct CIndexOptions {
    // Credit for a comparable pair whose scores are bit-identical: 0.0 (strict
    // indicator, the default) or 0.5 (Harrell's usual convention).
    double tied_score_credit = 0.0;
};

// Exact pair counts over comparable pairs (j, i) with t_j < t_i and j
// uncensored. A pair is concordant when the earlier death has the higher score.
struct ConcordanceCounts {
    std::uint64_t concordant = 0;
    std::uint64_t tied_score = 0;
    std::uint64_t comparable = 0;

    // Throws Undefined when there are no comparable pairs.
    double value(const CIndexOptions& opts = {}) const;

    friend bool operator==(const ConcordanceCounts&, const ConcordanceCounts&) = default;
};

// O(n^2) double loop straight from the pair definition.
ConcordanceCounts concordance_counts_naive(std::span<const double> durations, EventView events,
                                           std::span<const double> scores);

// O(n log n): ascending-duration sweep over equal-duration blocks with a
// Fenwick tree of inserted death counts indexed by score rank.
ConcordanceCounts concordance_counts_fast(std::span<const double> durations, EventView events,
                                          std::span<const double> scores);

double c_index_naive(std::span<const double> durations, EventView events,
                     std::span<const double> scores, const CIndexOptions& opts = {});

double c_index_fast(std::span<const double> durations, EventView events,
                    std::span<const double> scores, const CIndexOptions& opts = {});

}  // namespace fastcox
