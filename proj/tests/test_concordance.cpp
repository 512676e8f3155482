#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fastcox/concordance.hpp"
#include "fastcox/errors.hpp"

using namespace fastcox;

namespace {

struct Case {
    std::vector<double> t;
    EventFlags e;
    std::vector<double> g;
};

Case random_case(std::mt19937_64& rng, std::size_t n, int time_levels, int score_levels, double censor) {
    std::uniform_int_distribution<int> tl(1, time_levels);
    std::uniform_int_distribution<int> sl(1, score_levels);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Case c;
    for (std::size_t i = 0; i < n; ++i) {
        c.t.push_back(tl(rng));
        c.e.push_back(u(rng) >= censor ? 1 : 0);
        c.g.push_back(0.25 * sl(rng));
    }
    return c;
}

}  // namespace

TEST_CASE("hand-checked rankings") {
    const std::vector<double> t{1, 2, 3};
    CHECK(c_index_naive(t, EventFlags{1, 1, 1}, std::vector<double>{3, 2, 1}) == 1.0);
    CHECK(c_index_naive(t, EventFlags{1, 1, 1}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(c_index_naive(t, EventFlags{0, 1, 1}, std::vector<double>{0, 5, 1}) == 1.0);
    CHECK(c_index_fast(t, EventFlags{1, 1, 1}, std::vector<double>{3, 2, 1}) == 1.0);
    CHECK(c_index_fast(t, EventFlags{1, 1, 1}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(c_index_fast(t, EventFlags{0, 1, 1}, std::vector<double>{0, 5, 1}) == 1.0);
}

TEST_CASE("equal-duration pairs are not comparable") {
    // Pairs: (t=1, g=5) -> (t=2, g=3) concordant; (t=1, g=1) -> (t=2, g=3) discordant.
    const std::vector<double> t{1, 1, 2};
    const EventFlags e{1, 1, 1};
    const std::vector<double> g{5, 1, 3};
    const auto counts = concordance_counts_fast(t, e, g);
    CHECK(counts.comparable == 2);
    CHECK(counts.concordant == 1);
    CHECK(c_index_fast(t, e, g) == 0.5);
    CHECK(c_index_naive(t, e, g) == 0.5);
}

TEST_CASE("tied scores: strict by default, half credit on request") {
    const std::vector<double> t{1, 2, 3};
    const EventFlags e{1, 1, 1};
    const std::vector<double> g{2, 2, 1};
    // Pairs: (1,2) tied, (1,3) concordant, (2,3) concordant.
    CHECK(c_index_fast(t, e, g) == doctest::Approx(2.0 / 3.0));
    CHECK(c_index_fast(t, e, g, {0.5}) == doctest::Approx(2.5 / 3.0));
    CHECK_THROWS_AS(c_index_fast(t, e, g, {0.25}), InvalidInput);
}

TEST_CASE("no comparable pair is undefined") {
    CHECK_THROWS_AS(c_index_fast(std::vector<double>{1}, EventFlags{1}, std::vector<double>{0}), Undefined);
    CHECK_THROWS_AS(c_index_naive(std::vector<double>{1, 2}, EventFlags{0, 1}, std::vector<double>{0, 1}), Undefined);
    CHECK_THROWS_AS(c_index_fast(std::vector<double>{2, 2}, EventFlags{1, 1}, std::vector<double>{0, 1}), Undefined);
}

TEST_CASE("length mismatch is rejected") {
    CHECK_THROWS_AS(c_index_fast(std::vector<double>{1, 2}, EventFlags{1}, std::vector<double>{0, 1}), InvalidInput);
}

TEST_CASE("fast counts equal naive counts on random tied data") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 1 + trial % 200;
        const auto c = random_case(rng, n, 1 + trial % 50, 1 + trial % 30, 0.3);
        CHECK(concordance_counts_fast(c.t, c.e, c.g) == concordance_counts_naive(c.t, c.e, c.g));
    }
}

TEST_CASE("monotone transforms and negation") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 100; ++trial) {
        auto c = random_case(rng, 60, 20, 1000, 0.3);
        for (auto& g : c.g) g = normal(rng);  // continuous: no tied scores
        std::vector<double> transformed;
        std::vector<double> negated;
        for (double g : c.g) {
            transformed.push_back(std::exp(3.0 * g) + 7.0);
            negated.push_back(-g);
        }
        const double base = c_index_fast(c.t, c.e, c.g);
        CHECK(c_index_fast(c.t, c.e, transformed) == base);
        CHECK(base + c_index_fast(c.t, c.e, negated) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(base >= 0.0);
        CHECK(base <= 1.0);
    }
}
