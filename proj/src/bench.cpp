#include "fastcox/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#ifdef __linux__
#include <sched.h>
#endif

#include "fastcox/csv.hpp"
#include "fastcox/errors.hpp"
#include "fastcox/risk_order.hpp"

namespace fastcox {
namespace {

#ifdef __linux__
// Keeps the calling thread on its current CPU for the lifetime of the guard.
class CpuPin {
public:
    CpuPin() {
        if (sched_getaffinity(0, sizeof(saved_), &saved_) != 0) return;
        const int cpu = sched_getcpu();
        if (cpu < 0) return;
        cpu_set_t one;
        CPU_ZERO(&one);
        CPU_SET(cpu, &one);
        active_ = sched_setaffinity(0, sizeof(one), &one) == 0;
    }
    ~CpuPin() {
        if (active_) sched_setaffinity(0, sizeof(saved_), &saved_);
    }
    CpuPin(const CpuPin&) = delete;
    CpuPin& operator=(const CpuPin&) = delete;

private:
    cpu_set_t saved_{};
    bool active_ = false;
};
#else
struct CpuPin {};
#endif

using Clock = std::chrono::steady_clock;

template <class F>
std::int64_t time_batch(F&& f, int batch) {
    const auto start = Clock::now();
    for (int b = 0; b < batch; ++b) f();
    const auto stop = Clock::now();
    return std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count();
}

volatile double g_sink = 0.0;

}  // namespace

double nll_oracle(std::span<const double> durations, EventView events, std::span<const double> g,
                  TieMethod method) {
    const std::size_t n = durations.size();
    if (events.size() != n || g.size() != n) throw InvalidInput("oracle: length mismatch");
    if (n > 500) throw InvalidInput("oracle: n must not exceed 500");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(g[i]) <= 30.0)) throw InvalidInput("oracle: |g| must not exceed 30");
    }

    double total = 0.0;
    if (method != TieMethod::Efron) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!events[i]) continue;
            double risk = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (durations[j] >= durations[i]) risk += std::exp(g[j]);
            }
            total += std::log(risk / std::exp(g[i]));
        }
        return total;
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!events[i]) continue;
        // Handle each distinct death time once, at its first death.
        bool seen = false;
        for (std::size_t k = 0; k < i && !seen; ++k) seen = events[k] && durations[k] == durations[i];
        if (seen) continue;

        double risk = 0.0;
        double tied = 0.0;
        std::vector<double> tied_exp;
        for (std::size_t j = 0; j < n; ++j) {
            if (durations[j] >= durations[i]) risk += std::exp(g[j]);
            if (events[j] && durations[j] == durations[i]) {
                tied += std::exp(g[j]);
                tied_exp.push_back(std::exp(g[j]));
            }
        }
        // k-th factor of the product paired with the k-th tied death.
        const double d = static_cast<double>(tied_exp.size());
        for (std::size_t k = 0; k < tied_exp.size(); ++k) {
            total += std::log((risk - (static_cast<double>(k) / d) * tied) / tied_exp[k]);
        }
    }
    return total;
}

double nll_quadratic(const RiskOrder& order, std::span<const double> g, TieMethod method) {
    const std::vector<double> s = order.to_sorted(g);
    const double shift = s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
    std::vector<double> w(s.size());
    for (std::size_t p = 0; p < s.size(); ++p) w[p] = std::exp(s[p] - shift);

    const auto& events = order.sorted_events();
    double total = 0.0;
    for (std::size_t gi : order.death_groups()) {
        const TieGroup& grp = order.groups()[gi];
        if (method == TieMethod::Efron) {
            double risk = 0.0;
            for (std::size_t q = 0; q <= grp.last(); ++q) risk += w[q];
            double tied = 0.0;
            for (std::size_t p = grp.begin; p < grp.end; ++p) {
                if (events[p]) tied += w[p];
            }
            const auto d = static_cast<double>(grp.deaths);
            for (std::size_t k = 0; k < grp.deaths; ++k) {
                total += std::log(risk - (static_cast<double>(k) / d) * tied) + shift;
            }
            for (std::size_t p = grp.begin; p < grp.end; ++p) {
                if (events[p]) total -= s[p];
            }
        } else {
            for (std::size_t p = grp.begin; p < grp.end; ++p) {
                if (!events[p]) continue;
                double risk = 0.0;
                for (std::size_t q = 0; q <= grp.last(); ++q) risk += w[q];
                total += std::log(risk) + shift - s[p];
            }
        }
    }
    return total;
}

std::string to_string(BenchMethod method) {
    switch (method) {
        case BenchMethod::FastBreslow: return "fast_breslow";
        case BenchMethod::FastEfron: return "fast_efron";
        case BenchMethod::NaiveBreslow: return "naive_breslow";
        case BenchMethod::NaiveEfron: return "naive_efron";
    }
    return "unknown";
}

BenchMethod parse_bench_method(std::string_view name) {
    for (auto m : {BenchMethod::FastBreslow, BenchMethod::FastEfron, BenchMethod::NaiveBreslow,
                   BenchMethod::NaiveEfron}) {
        if (to_string(m) == name) return m;
    }
    throw InvalidInput("unknown bench method '" + std::string(name) + "'");
}

double BenchReport::ratio(BenchMethod method, std::size_t n_lo, std::size_t n_hi) const {
    auto find = [&](std::size_t n) {
        for (const auto& r : rows) {
            if (r.method == method && r.n == n) return static_cast<double>(std::max<std::int64_t>(r.median_ns, 1));
        }
        throw InvalidInput("bench report has no " + to_string(method) + " row for n=" + std::to_string(n));
    };
    return find(n_hi) / find(n_lo);
}

std::vector<std::size_t> default_bench_sizes() {
    std::vector<std::size_t> sizes;
    for (std::size_t n = 64; n <= 16384; n *= 2) sizes.push_back(n);
    return sizes;
}

BenchReport run_scaling_bench(std::span<const std::size_t> sizes, int reps, std::uint64_t seed) {
    if (reps < 3) throw InvalidInput("bench: reps must be at least 3");
    if (!std::is_sorted(sizes.begin(), sizes.end())) throw InvalidInput("bench: sizes must be ascending");
    for (std::size_t n : sizes) {
        if (n == 0) throw InvalidInput("bench: sizes must be positive");
    }

    const CpuPin pin;
    // Each timed batch runs for at least this long so small n rise above
    // clock resolution.
    constexpr std::int64_t kMinBatchNs = 200'000;

    BenchReport report;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t n : sizes) {
        std::vector<double> durations(n);
        std::vector<double> g(n);
        const EventFlags events(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            durations[i] = static_cast<double>(n - i);
            g[i] = normal(rng);
        }
        const RiskOrder order(durations, events);

        for (auto method : {BenchMethod::FastBreslow, BenchMethod::FastEfron,
                            BenchMethod::NaiveBreslow, BenchMethod::NaiveEfron}) {
            auto run = [&] {
                switch (method) {
                    case BenchMethod::FastBreslow: g_sink = nll_breslow(order, g).nll; break;
                    case BenchMethod::FastEfron: g_sink = nll_efron(order, g).nll; break;
                    case BenchMethod::NaiveBreslow: g_sink = nll_quadratic(order, g, TieMethod::Breslow); break;
                    case BenchMethod::NaiveEfron: g_sink = nll_quadratic(order, g, TieMethod::Efron); break;
                }
            };
            const std::int64_t warmup = std::max<std::int64_t>(time_batch(run, 1), 1);
            const int batch = static_cast<int>(std::clamp<std::int64_t>(kMinBatchNs / warmup + 1, 1, 100'000));

            std::vector<std::int64_t> per_call;
            for (int r = 0; r < reps; ++r) per_call.push_back(time_batch(run, batch) / batch);
            std::nth_element(per_call.begin(), per_call.begin() + reps / 2, per_call.end());
            report.rows.push_back({n, method, per_call[static_cast<std::size_t>(reps / 2)], reps});
        }
    }
    return report;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw InvalidInput("unknown report format '" + std::string(name) + "'");
}

void emit_report(const BenchReport& report, std::ostream& out, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        csv::write_row(out, {"n", "method", "median_ns", "reps"});
        for (const auto& r : report.rows) {
            csv::write_row(out, {std::to_string(r.n), to_string(r.method), std::to_string(r.median_ns),
                                 std::to_string(r.reps)});
        }
        return;
    }
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        nlohmann::ordered_json row;
        row["n"] = r.n;
        row["method"] = to_string(r.method);
        row["median_ns"] = r.median_ns;
        row["reps"] = r.reps;
        rows.push_back(std::move(row));
    }
    out << rows.dump(2) << '\n';
}

void emit_report(const BenchReport& report, const std::string& path, ReportFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    emit_report(report, out, format);
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

BenchReport parse_report(std::istream& in, ReportFormat format) {
    BenchReport report;
    if (format == ReportFormat::Json) {
        const auto rows = nlohmann::json::parse(in);
        for (const auto& row : rows) {
            report.rows.push_back({row.at("n").get<std::size_t>(),
                                   parse_bench_method(row.at("method").get<std::string>()),
                                   row.at("median_ns").get<std::int64_t>(), row.at("reps").get<int>()});
        }
        return report;
    }
    const csv::Table table = csv::parse(in);
    if (table.header != std::vector<std::string>{"n", "method", "median_ns", "reps"}) {
        throw ParseError("unexpected bench report header", 1);
    }
    for (const auto& rec : table.rows) {
        const auto& f = rec.fields;
        try {
            report.rows.push_back({static_cast<std::size_t>(std::stoull(f[0])), parse_bench_method(f[1]),
                                   static_cast<std::int64_t>(std::stoll(f[2])), std::stoi(f[3])});
        } catch (const std::logic_error&) {
            throw ParseError("malformed bench report row", rec.line);
        }
    }
    return report;
}

}  // namespace fastcox
