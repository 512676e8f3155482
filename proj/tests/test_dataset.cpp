#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fastcox/dataset.hpp"
#include "fastcox/errors.hpp"

using namespace fastcox;

namespace {

LoadResult load_text(const std::string& text, LoadOptions opts) {
    std::istringstream in(text);
    return load_csv(in, opts);
}

LoadOptions basic() { return {"time", "status", std::nullopt}; }

}  // namespace

TEST_CASE("three-row numeric file") {
    const auto r = load_text("time,status,x1\n1.5,1,0.2\n2,0,-1\n3,true,4\n", basic());
    CHECK(r.data.size() == 3);
    CHECK(r.data.num_features() == 1);
    CHECK(r.data.feature_names == std::vector<std::string>{"x1"});
    CHECK(r.data.events == EventFlags{1, 0, 1});
    CHECK(r.data.features(2, 0) == 4.0);
    CHECK(r.dropped_rows == 0);
}

TEST_CASE("categorical columns are one-hot encoded in lexicographic order") {
    const auto r = load_text("time,status,col,x\n1,1,b,0\n2,0,a,1\n3,1,c,2\n4,1,a,3\n", basic());
    CHECK(r.data.feature_names == std::vector<std::string>{"col=a", "col=b", "col=c", "x"});
    CHECK(r.data.features(0, 1) == 1.0);
    CHECK(r.data.features(1, 0) == 1.0);
    CHECK(r.data.features(3, 0) == 1.0);
    CHECK(r.data.features.row(2).head(3).sum() == 1.0);
}

TEST_CASE("event spellings") {
    const auto r = load_text("time,status\n1,T\n2,f\n3,TRUE\n4,False\n5,1.0\n6,0\n", basic());
    CHECK(r.data.events == EventFlags{1, 0, 1, 0, 1, 0});
    CHECK(r.data.num_features() == 0);
}

TEST_CASE("rows with missing values are dropped and counted") {
    const auto r = load_text("time,status,x\n1,1,NA\n2,0,3\n,1,4\n4,1,\n5,1,6\n", basic());
    CHECK(r.data.size() == 2);
    CHECK(r.dropped_rows == 3);
}

TEST_CASE("explicit feature selection") {
    LoadOptions opts = basic();
    opts.feature_columns = std::vector<std::string>{"b"};
    const auto r = load_text("time,status,a,b\n1,1,5,6\n2,0,7,8\n", opts);
    CHECK(r.data.feature_names == std::vector<std::string>{"b"});
    opts.feature_columns = std::vector<std::string>{"nope"};
    CHECK_THROWS_AS(load_text("time,status,a\n1,1,2\n", opts), InvalidInput);
}

TEST_CASE("parse errors report the line") {
    try {
        load_text("time,status\n1,1\nabc,0\n", basic());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(load_text("time,status\n1,2\n", basic()), ParseError);
    CHECK_THROWS_AS(load_text("time,status\n-1,1\n", basic()), ParseError);
    CHECK_THROWS_AS(load_text("time,status\nNA,1\n", basic()), EmptyDataset);
    CHECK_THROWS_AS(load_text("t,status\n1,1\n", basic()), InvalidInput);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", basic()), IoError);
}

TEST_CASE("write then load is the identity") {
    const SurvivalDataset ds = synth({40, 4, 2, 0.3, 0.25, 99});
    std::stringstream buf;
    write_csv(ds, buf);
    const auto back = load_csv(buf, {"time", "event", std::nullopt}).data;
    CHECK(back.durations == ds.durations);
    CHECK(back.events == ds.events);
    CHECK(back.feature_names == ds.feature_names);
    CHECK(back.features == ds.features);
}

TEST_CASE("stratified split arithmetic") {
    // 4 uncensored, 6 censored, 80% train.
    const EventFlags e{1, 0, 1, 0, 0, 1, 0, 0, 1, 0};
    const auto s = stratified_split_indices(e, 0.8, 1);
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);
    const auto train_events = std::count_if(s.train.begin(), s.train.end(), [&](std::size_t i) { return e[i]; });
    CHECK((train_events == 3 || train_events == 4));

    const auto again = stratified_split_indices(e, 0.8, 1);
    CHECK(again.train == s.train);
    CHECK(again.test == s.test);

    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == e.size());
}

TEST_CASE("split sized like WHAS500 keeps the event ratio") {
    EventFlags e(500, 0);
    std::fill(e.begin(), e.begin() + 215, 1);
    const auto s = stratified_split_indices(e, 0.8, 3);
    CHECK(s.train.size() == 400);
    CHECK(s.test.size() == 100);
    const auto train_events = std::count_if(s.train.begin(), s.train.end(), [&](std::size_t i) { return e[i]; });
    CHECK(std::abs(static_cast<double>(train_events) - 0.43 * 400) <= 1.0);
}

TEST_CASE("split partitions random data") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const SurvivalDataset ds = synth({37 + seed, 2, 1, 0.4, 0.0, seed});
        const auto s = stratified_split_indices(ds.events, 0.7, seed);
        CHECK(s.train.size() + s.test.size() == ds.size());
        std::vector<std::size_t> merged = s.train;
        merged.insert(merged.end(), s.test.begin(), s.test.end());
        std::sort(merged.begin(), merged.end());
        CHECK(std::adjacent_find(merged.begin(), merged.end()) == merged.end());
        const auto [train, test] = stratified_split(ds, 0.7, seed);
        CHECK(train.size() == s.train.size());
        CHECK(test.size() == s.test.size());
    }
}

TEST_CASE("split errors") {
    CHECK_THROWS_AS(stratified_split_indices(EventFlags{1, 0}, 1.0, 0), InvalidInput);
    CHECK_THROWS_AS(stratified_split_indices(EventFlags{1, 0}, 0.0, 0), InvalidInput);
    // One uncensored sample at 40% train: its stratum would be emptied.
    CHECK_THROWS_AS(stratified_split_indices(EventFlags{1, 0, 0, 0, 0}, 0.4, 0), InvalidInput);
}

TEST_CASE("synth properties") {
    const SurvivalDataset one = synth({1, 3, 1, 0.0, 0.0, 5});
    CHECK(one.size() == 1);
    CHECK(one.durations[0] > 0.0);

    const SurvivalDataset uncensored = synth({300, 2, 1, 0.0, 0.0, 6});
    CHECK(uncensored.event_count() == 300);

    const SurvivalDataset tied = synth({1000, 2, 2, 0.2, 1.0, 7});
    std::set<double> distinct(tied.durations.begin(), tied.durations.end());
    CHECK(distinct.size() < 1000);
    for (double t : tied.durations) CHECK(t > 0.0);

    const SurvivalDataset a = synth({50, 3, 2, 0.3, 0.0, 42});
    const SurvivalDataset b = synth({50, 3, 2, 0.3, 0.0, 42});
    CHECK(a.durations == b.durations);
    CHECK(a.events == b.events);
    CHECK(a.features == b.features);

    const auto beta = planted_coefficients(5, 3);
    CHECK(beta(0) == 1.0);
    CHECK(beta(1) == -1.0);
    CHECK(beta(2) == 1.0);
    CHECK(beta(3) == 0.0);
    CHECK_THROWS_AS(synth({10, 2, 3, 0.0, 0.0, 0}), InvalidInput);
    CHECK_THROWS_AS(synth({10, 2, 1, 1.0, 0.0, 0}), InvalidInput);
    CHECK_THROWS_AS(synth({0, 2, 1, 0.0, 0.0, 0}), InvalidInput);
}

TEST_CASE("WHAS500 export, when supplied") {
    const std::filesystem::path path = std::filesystem::path(FASTCOX_TEST_DATA_DIR) / "whas500.csv";
    if (!std::filesystem::exists(path)) {
        MESSAGE("whas500.csv not present; skipping");
        return;
    }
    const auto r = load_csv(path.string(), {"lenfol", "fstat", std::nullopt});
    CHECK(r.data.size() == 500);
    CHECK(r.data.num_features() == 14);
    CHECK(r.data.event_count() == 215);
}
