#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fastcox/bench.hpp"
#include "fastcox/errors.hpp"
#include "fastcox/loss.hpp"
#include "test_support.hpp"

using namespace fastcox;

namespace {

double loss_of(const std::vector<double>& t, const EventFlags& e, const std::vector<double>& g,
               TieMethod m) {
    return nll(RiskOrder(t, e), g, m).nll;
}

}  // namespace

TEST_CASE("Breslow hand-evaluated cases") {
    CHECK(loss_of({2, 1}, {1, 1}, {0, 0}, TieMethod::Breslow) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(loss_of({1, 1}, {1, 1}, {0, 0}, TieMethod::Breslow) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("Breslow with a tied pair and a censored tail") {
    // Plain evaluation at 50 digits of the shared-denominator formula.
    const double v = loss_of({3, 2, 2, 1}, {1, 1, 1, 0}, {0.5, -0.3, 0.1, 0.2}, TieMethod::Breslow);
    CHECK(v == doctest::Approx(2.702501027456988280272221).epsilon(1e-14));
}

TEST_CASE("Efron hand-evaluated two-death tie") {
    CHECK(loss_of({1, 1}, {1, 1}, {0, 0}, TieMethod::Efron) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("Efron with a three-death tie behind a censored sample") {
    const std::vector<double> t{3, 2, 2, 2, 1};
    const EventFlags e{0, 1, 1, 1, 1};
    const std::vector<double> g{0.2, -1.0, 0.0, 1.0, 0.5};
    CHECK(loss_of(t, e, g, TieMethod::Efron) == doctest::Approx(5.430485117480147676912758).epsilon(1e-14));
    CHECK(loss_of(t, e, g, TieMethod::Breslow) == doctest::Approx(6.447044544884709697697536).epsilon(1e-14));
}

TEST_CASE("NoTiesAssumed is rejected when ties are present") {
    const RiskOrder tied(std::vector<double>{1, 1, 2}, EventFlags{1, 0, 1});
    const std::vector<double> g{0, 0, 0};
    CHECK_THROWS_AS(nll(tied, g, TieMethod::NoTiesAssumed), InvalidInput);
    const RiskOrder free(std::vector<double>{1, 3, 2}, EventFlags{1, 0, 1});
    CHECK(nll(free, g, TieMethod::NoTiesAssumed).nll == nll(free, g, TieMethod::Breslow).nll);
}

TEST_CASE("all-censored input has zero loss and zero gradient") {
    const RiskOrder order(std::vector<double>{1, 2, 2, 5}, EventFlags{0, 0, 0, 0});
    const std::vector<double> g{0.3, -2.0, 1.0, 4.0};
    for (auto m : {TieMethod::Breslow, TieMethod::Efron}) {
        const LossValue v = nll(order, g, m, true);
        CHECK(v.nll == 0.0);
        REQUIRE(v.grad);
        for (double d : *v.grad) CHECK(d == 0.0);
    }
}

TEST_CASE("score validation") {
    const RiskOrder order(std::vector<double>{1, 2}, EventFlags{1, 1});
    CHECK_THROWS_AS(nll(order, std::vector<double>{0.0}, TieMethod::Efron), InvalidInput);
    CHECK_THROWS_AS(nll(order, std::vector<double>{0.0, NAN}, TieMethod::Efron), InvalidInput);
    CHECK_THROWS_AS(nll(order, std::vector<double>{INFINITY, 0.0}, TieMethod::Breslow), InvalidInput);
    CHECK_THROWS_AS(parse_tie_method("exact"), InvalidInput);
    CHECK(parse_tie_method("Efron") == TieMethod::Efron);
}

TEST_CASE("Efron equals Breslow bitwise without tied deaths") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = testing::random_instance(rng, 1 + trial % 30, 0.0, 0.3, 3.0);
        const RiskOrder order(inst.durations, inst.events);
        const LossValue b = nll_breslow(order, inst.scores, true);
        const LossValue e = nll_efron(order, inst.scores, true);
        CHECK(b.nll == e.nll);
        CHECK(*b.grad == *e.grad);
    }
}

TEST_CASE("core loss agrees with the plain-arithmetic oracle") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        const double gran = std::array{0.0, 0.3, 0.6}[trial % 3];
        const double cens = std::array{0.0, 0.3, 0.6}[(trial / 3) % 3];
        const auto inst = testing::random_instance(rng, 1 + trial % 12, gran, cens, 5.0);
        const RiskOrder order(inst.durations, inst.events);
        for (auto m : {TieMethod::Breslow, TieMethod::Efron}) {
            const double fast = nll(order, inst.scores, m).nll;
            const double slow = nll_oracle(inst.durations, inst.events, inst.scores, m);
            CHECK_MESSAGE(testing::close(fast, slow, 1e-10, 0.0), fast << " vs " << slow << " n=" << inst.durations.size() << " m=" << to_string(m));
        }
    }
}

TEST_CASE("shift invariance") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const auto inst = testing::random_instance(rng, 2 + trial % 40, 0.3, 0.3, 3.0);
        const RiskOrder order(inst.durations, inst.events);
        for (auto m : {TieMethod::Breslow, TieMethod::Efron}) {
            const double base = nll(order, inst.scores, m).nll;
            for (double c : {-20.0, -1.0, 1.0, 20.0}) {
                std::vector<double> shifted = inst.scores;
                for (auto& x : shifted) x += c;
                CHECK(std::abs(nll(order, shifted, m).nll - base) <= 1e-9);
            }
        }
    }
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const auto inst = testing::random_instance(rng, 2 + trial % 49, 0.5 * (trial % 2), 0.5 * ((trial / 2) % 2), 3.0);
        const RiskOrder order(inst.durations, inst.events);
        for (auto m : {TieMethod::Breslow, TieMethod::Efron}) {
            const LossValue v = nll(order, inst.scores, m, true);
            for (std::size_t i = 0; i < inst.scores.size(); ++i) {
                const double fd = testing::central_difference_extended(inst.durations, inst.events, inst.scores,
                                                                       m == TieMethod::Efron, i, 1e-5);
                CHECK_MESSAGE(testing::close((*v.grad)[i], fd, 1e-6, 1e-9), (*v.grad)[i] << " vs fd " << fd);
            }
        }
    }
}

TEST_CASE("gradient sums to zero (shift invariance, differentiated)") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto inst = testing::random_instance(rng, 30, 0.4, 0.3, 3.0);
        const RiskOrder order(inst.durations, inst.events);
        const LossValue v = nll_efron(order, inst.scores, true);
        const double total = std::accumulate(v.grad->begin(), v.grad->end(), 0.0);
        CHECK(std::abs(total) <= 1e-10 * static_cast<double>(order.event_count() + 1));
    }
}

TEST_CASE("permutation invariance") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        auto inst = testing::random_instance(rng, 1 + trial % 25, 0.4, 0.3, 3.0);
        std::vector<std::size_t> perm(inst.scores.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        testing::Instance shuffled;
        for (std::size_t k : perm) {
            shuffled.durations.push_back(inst.durations[k]);
            shuffled.events.push_back(inst.events[k]);
            shuffled.scores.push_back(inst.scores[k]);
        }
        for (auto m : {TieMethod::Breslow, TieMethod::Efron}) {
            const double a = loss_of(inst.durations, inst.events, inst.scores, m);
            const double b = loss_of(shuffled.durations, shuffled.events, shuffled.scores, m);
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("extreme scores stay finite and never hit the domain error") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> big(-700.0, 700.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto inst = testing::random_instance(rng, 2 + trial % 30, 0.6, 0.3, 1.0);
        for (auto& g : inst.scores) g = big(rng);
        const RiskOrder order(inst.durations, inst.events);
        for (auto m : {TieMethod::Breslow, TieMethod::Efron}) {
            LossValue v;
            REQUIRE_NOTHROW(v = nll(order, inst.scores, m, true));
            CHECK(std::isfinite(v.nll));
            for (double d : *v.grad) CHECK(std::isfinite(d));
        }
    }
}
