#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fastcox/loss.hpp"
#include "fastcox/types.hpp"

namespace fastcox {

// Ground-truth negative log partial likelihood: explicit risk-set loops over
// the unsorted input in plain (not log-space) arithmetic. O(n^2).
// Requires n <= 500 and |g| <= 30 so exp cannot overflow; InvalidInput otherwise.
double nll_oracle(std::span<const double> durations, EventView events, std::span<const double> g,
                  TieMethod method);

// Deliberately quadratic reference for timing: every death recomputes its
// risk-set sum with an inner loop over the sorted prefix.
double nll_quadratic(const RiskOrder& order, std::span<const double> g, TieMethod method);

enum class BenchMethod { FastBreslow, FastEfron, NaiveBreslow, NaiveEfron };

std::string to_string(BenchMethod method);
BenchMethod parse_bench_method(std::string_view name);

struct BenchRow {
    std::size_t n = 0;
    BenchMethod method = BenchMethod::FastBreslow;
    std::int64_t median_ns = 0;  // per loss evaluation
    int reps = 0;

    friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

struct BenchReport {
    std::vector<BenchRow> rows;

    // median_ns(n_hi) / median_ns(n_lo) for one method; throws InvalidInput
    // if either row is missing.
    double ratio(BenchMethod method, std::size_t n_lo, std::size_t n_hi) const;
};

// Powers of two from 2^6 to 2^14.
std::vector<std::size_t> default_bench_sizes();

// For each size: all-uncensored data already sorted by duration, normal
// scores. Only the loss evaluation is timed (order construction excluded);
// one warmup is discarded, then reps timed batches, median reported.
// Requires reps >= 3 and ascending sizes.
BenchReport run_scaling_bench(std::span<const std::size_t> sizes, int reps, std::uint64_t seed);

enum class ReportFormat { Csv, Json };
ReportFormat parse_report_format(std::string_view name);

// Columns/keys in the order n, method, median_ns, reps. Throws IoError.
void emit_report(const BenchReport& report, const std::string& path, ReportFormat format);
void emit_report(const BenchReport& report, std::ostream& out, ReportFormat format);
BenchReport parse_report(std::istream& in, ReportFormat format);

}  // namespace fastcox
