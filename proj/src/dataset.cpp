#include "fastcox/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "fastcox/csv.hpp"
#include "fastcox/errors.hpp"

namespace fastcox {
namespace {

std::optional<std::uint8_t> parse_event(std::string_view field) {
    std::string t;
    for (char c : field) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (t == "1" || t == "true" || t == "t") return 1;
    if (t == "0" || t == "false" || t == "f") return 0;
    // Numeric spellings such as 1.0 or 0e0.
    if (auto v = csv::parse_number(t)) {
        if (*v == 1.0) return 1;
        if (*v == 0.0) return 0;
    }
    return std::nullopt;
}

}  // namespace

std::size_t SurvivalDataset::event_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(),
                                                  [](std::uint8_t e) { return e != 0; }));
}

SurvivalDataset SurvivalDataset::subset(const std::vector<std::size_t>& rows) const {
    SurvivalDataset out;
    out.feature_names = feature_names;
    out.duration_name = duration_name;
    out.event_name = event_name;
    out.durations.reserve(rows.size());
    out.events.reserve(rows.size());
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t r = rows.at(k);
        if (r >= size()) throw InvalidInput("subset: row index out of range");
        out.durations.push_back(durations[r]);
        out.events.push_back(events[r]);
        out.features.row(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(r));
    }
    return out;
}

void SurvivalDataset::validate() const {
    const std::size_t n = durations.size();
    if (n == 0) throw InvalidInput("dataset: no samples");
    if (events.size() != n || static_cast<std::size_t>(features.rows()) != n) {
        throw InvalidInput("dataset: durations, events and features disagree on n");
    }
    if (feature_names.size() != num_features()) {
        throw InvalidInput("dataset: feature_names does not match the feature matrix");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(durations[i]) || durations[i] <= 0.0) {
            throw InvalidInput("dataset: duration at row " + std::to_string(i) +
                               " must be positive and finite");
        }
    }
    if (!features.allFinite()) throw InvalidInput("dataset: non-finite feature value");
}

LoadResult load_csv(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return load_csv(in, opts);
}

LoadResult load_csv(std::istream& in, const LoadOptions& opts) {
    const csv::Table table = csv::parse(in);

    auto require = [&](const std::string& name, const char* role) {
        auto idx = table.column(name);
        if (!idx) throw InvalidInput(std::string(role) + " column '" + name + "' not found in header");
        return *idx;
    };
    const std::size_t time_col = require(opts.duration_column, "duration");
    const std::size_t event_col = require(opts.event_column, "event");
    if (time_col == event_col) throw InvalidInput("duration and event columns must differ");

    std::vector<std::size_t> feature_cols;
    if (opts.feature_columns) {
        for (const auto& name : *opts.feature_columns) {
            const std::size_t c = require(name, "feature");
            if (c == time_col || c == event_col) {
                throw InvalidInput("feature column '" + name + "' is the duration or event column");
            }
            feature_cols.push_back(c);
        }
    } else {
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c != time_col && c != event_col) feature_cols.push_back(c);
        }
    }

    // Pass 1: pick complete rows and parse the response.
    LoadResult result;
    SurvivalDataset& ds = result.data;
    ds.duration_name = opts.duration_column;
    ds.event_name = opts.event_column;
    std::vector<const csv::Record*> kept;
    for (const auto& rec : table.rows) {
        const auto& f = rec.fields;
        bool missing = csv::is_missing(f[time_col]) || csv::is_missing(f[event_col]);
        for (std::size_t c : feature_cols) missing = missing || csv::is_missing(f[c]);
        if (missing) {
            ++result.dropped_rows;
            continue;
        }
        const auto t = csv::parse_number(f[time_col]);
        if (!t) throw ParseError("cannot parse duration '" + f[time_col] + "'", rec.line);
        if (*t <= 0.0) throw ParseError("duration must be positive, got '" + f[time_col] + "'", rec.line);
        const auto e = parse_event(f[event_col]);
        if (!e) throw ParseError("cannot parse event indicator '" + f[event_col] + "'", rec.line);
        ds.durations.push_back(*t);
        ds.events.push_back(*e);
        kept.push_back(&rec);
    }
    if (kept.empty()) throw EmptyDataset("no usable rows after dropping rows with missing values");

    // Pass 2: numeric columns pass through, anything else is one-hot encoded.
    std::vector<std::vector<double>> columns;
    for (std::size_t c : feature_cols) {
        std::vector<double> values;
        values.reserve(kept.size());
        bool numeric = true;
        for (const auto* rec : kept) {
            const auto v = csv::parse_number(rec->fields[c]);
            if (!v) {
                numeric = false;
                break;
            }
            values.push_back(*v);
        }
        if (numeric) {
            ds.feature_names.push_back(table.header[c]);
            columns.push_back(std::move(values));
            continue;
        }
        std::set<std::string> levels;
        for (const auto* rec : kept) levels.insert(rec->fields[c]);
        for (const auto& level : levels) {
            std::vector<double> indicator;
            indicator.reserve(kept.size());
            for (const auto* rec : kept) indicator.push_back(rec->fields[c] == level ? 1.0 : 0.0);
            ds.feature_names.push_back(table.header[c] + "=" + level);
            columns.push_back(std::move(indicator));
        }
    }

    ds.features.resize(static_cast<Eigen::Index>(kept.size()),
                       static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t i = 0; i < kept.size(); ++i) {
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
        }
    }
    return result;
}

void write_csv(const SurvivalDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_csv(ds, out);
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

void write_csv(const SurvivalDataset& ds, std::ostream& out) {
    std::vector<std::string> row{ds.duration_name, ds.event_name};
    row.insert(row.end(), ds.feature_names.begin(), ds.feature_names.end());
    csv::write_row(out, row);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        row.clear();
        row.push_back(csv::format_number(ds.durations[i]));
        row.push_back(ds.events[i] ? "1" : "0");
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
            row.push_back(csv::format_number(ds.features(static_cast<Eigen::Index>(i), j)));
        }
        csv::write_row(out, row);
    }
}

SplitIndices stratified_split_indices(EventView events, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw InvalidInput("split: train fraction must lie strictly between 0 and 1");
    }
    std::vector<std::size_t> strata[2];
    for (std::size_t i = 0; i < events.size(); ++i) strata[events[i] ? 1 : 0].push_back(i);

    const double test_fraction = 1.0 - train_fraction;
    // The small slack keeps e.g. 0.2 * 10 from flooring to 1.
    constexpr double slack = 1e-9;
    std::size_t test_size[2];
    double remainder[2];
    std::size_t assigned = 0;
    for (int s = 0; s < 2; ++s) {
        const double ideal = test_fraction * static_cast<double>(strata[s].size());
        test_size[s] = static_cast<std::size_t>(std::floor(ideal + slack));
        remainder[s] = ideal - static_cast<double>(test_size[s]);
        assigned += test_size[s];
    }
    const auto total_test = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(events.size()) + 0.5 + slack));
    // Uncensored first on equal remainders.
    int order[2] = {1, 0};
    if (remainder[0] > remainder[1]) std::swap(order[0], order[1]);
    for (int s : order) {
        if (assigned < total_test && test_size[s] < strata[s].size()) {
            ++test_size[s];
            ++assigned;
        }
    }

    SplitIndices out;
    std::mt19937_64 rng(seed);
    for (int s : {1, 0}) {
        auto& idx = strata[s];
        if (!idx.empty() && test_size[s] >= idx.size()) {
            throw InvalidInput(std::string("split: the ") + (s ? "uncensored" : "censored") +
                               " stratum would leave no training samples");
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(test_size[s]));
        out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(test_size[s]), idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::pair<SurvivalDataset, SurvivalDataset> stratified_split(const SurvivalDataset& ds,
                                                             double train_fraction,
                                                             std::uint64_t seed) {
    const SplitIndices idx = stratified_split_indices(ds.events, train_fraction, seed);
    return {ds.subset(idx.train), ds.subset(idx.test)};
}

Eigen::VectorXd planted_coefficients(std::size_t p, std::size_t n_informative) {
    if (n_informative > p) throw InvalidInput("synth: n_informative exceeds p");
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < n_informative; ++j) {
        beta(static_cast<Eigen::Index>(j)) = (j % 2 == 0) ? 1.0 : -1.0;
    }
    return beta;
}

SurvivalDataset synth(const SynthOptions& opts) {
    if (opts.n < 1) throw InvalidInput("synth: n must be at least 1");
    if (!(opts.censor_rate >= 0.0 && opts.censor_rate < 1.0)) {
        throw InvalidInput("synth: censor_rate must lie in [0, 1)");
    }
    if (!(opts.tie_granularity >= 0.0) || !std::isfinite(opts.tie_granularity)) {
        throw InvalidInput("synth: tie_granularity must be a finite nonnegative number");
    }
    const Eigen::VectorXd beta = planted_coefficients(opts.p, opts.n_informative);

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    SurvivalDataset ds;
    const auto n = static_cast<Eigen::Index>(opts.n);
    const auto p = static_cast<Eigen::Index>(opts.p);
    ds.features.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) ds.features(i, j) = normal(rng);
    }
    for (Eigen::Index j = 0; j < p; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));

    ds.durations.resize(opts.n);
    ds.events.resize(opts.n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double rate = std::exp(ds.features.row(i).dot(beta));
        // Inverse-CDF draw; 1 - u lies in (0, 1].
        double t = -std::log(1.0 - uniform(rng)) / rate;
        if (opts.tie_granularity > 0.0) {
            t = std::max(1.0, std::ceil(t / opts.tie_granularity)) * opts.tie_granularity;
        } else if (t <= 0.0) {
            t = std::numeric_limits<double>::min();
        }
        ds.durations[static_cast<std::size_t>(i)] = t;
        ds.events[static_cast<std::size_t>(i)] = uniform(rng) >= opts.censor_rate ? 1 : 0;
    }
    return ds;
}

}  // namespace fastcox
