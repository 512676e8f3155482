#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fastcox/types.hpp"

namespace fastcox {

// n samples of right-censored survival data. Durations are positive and
// finite; features are complete (no missing values).
struct SurvivalDataset {
    std::vector<double> durations;
    EventFlags events;
    Eigen::MatrixXd features;  // n x p
    std::vector<std::string> feature_names;
    std::string duration_name = "time";
    std::string event_name = "event";

    std::size_t size() const noexcept { return durations.size(); }
    std::size_t num_features() const noexcept { return static_cast<std::size_t>(features.cols()); }
    std::size_t event_count() const noexcept;

    // Rows in the given order.
    SurvivalDataset subset(const std::vector<std::size_t>& rows) const;

    // Throws InvalidInput if the invariants do not hold.
    void validate() const;
};

struct LoadOptions {
    std::string duration_column;
    std::string event_column;
    // nullopt: every remaining column. Otherwise exactly these (may be empty).
    std::optional<std::vector<std::string>> feature_columns;
};

struct LoadResult {
    SurvivalDataset data;
    std::size_t dropped_rows = 0;  // rows with a missing value in a used column
};

// Numeric feature columns are taken as-is; any column with a non-numeric
// value is one-hot encoded into "col=level" columns, levels sorted
// lexicographically. Events accept 0/1/true/false/t/f case-insensitively.
LoadResult load_csv(const std::string& path, const LoadOptions& opts);
LoadResult load_csv(std::istream& in, const LoadOptions& opts);

// Columns: duration, event (0/1), then features, all numbers in shortest
// round-trip form. load_csv with default feature selection reads it back
// unchanged.
void write_csv(const SurvivalDataset& ds, const std::string& path);
void write_csv(const SurvivalDataset& ds, std::ostream& out);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Censored and uncensored samples are shuffled and split separately. Each
// stratum gets floor((1 - f) * m) test samples, then the leftover that makes
// the total test size round((1 - f) * n) goes to strata with the largest
// fractional remainders. Indices are returned ascending.
SplitIndices stratified_split_indices(EventView events, double train_fraction, std::uint64_t seed);

std::pair<SurvivalDataset, SurvivalDataset> stratified_split(const SurvivalDataset& ds,
                                                             double train_fraction,
                                                             std::uint64_t seed);

struct SynthOptions {
    std::size_t n = 100;
    std::size_t p = 5;
    std::size_t n_informative = 0;
    double censor_rate = 0.0;
    double tie_granularity = 0.0;  // 0 = continuous durations
    std::uint64_t seed = 0;
};

// Planted coefficients: the first n_informative entries alternate +1, -1, ...
Eigen::VectorXd planted_coefficients(std::size_t p, std::size_t n_informative);

// Standard-normal features, exponential durations with rate exp(x' beta*),
// independent censoring flags with probability censor_rate. A positive
// tie_granularity rounds durations up to a multiple of it.
SurvivalDataset synth(const SynthOptions& opts);

}  // namespace fastcox
