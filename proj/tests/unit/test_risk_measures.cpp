#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "esarb/risk_measures.hpp"
#include "support.hpp"

using namespace esarb;

namespace {

WeightedSample make(std::vector<double> v, std::vector<double> w) { return {std::move(v), std::move(w)}; }

/// Golden-section minimum of a convex function on [lo, hi].
double golden_min(const std::function<double(double)>& f, double lo, double hi) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (f(c) < f(d)) b = d;
        else a = c;
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    return f(0.5 * (a + b));
}

}  // namespace

TEST(RiskLevel, RejectsOutOfRange) {
    for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
        try {
            RiskLevel bad(p);
            FAIL() << p;
        } catch (const std::invalid_argument& e) {
            EXPECT_STREQ(e.what(), "invalid level");
        }
    }
}

TEST(VarP, HandEnumeratedCdf) {
    for (double p : {0.01, 0.5, 0.99}) EXPECT_EQ(var_p(make({4.0}, {1.0}), RiskLevel(p)), -4.0);
    EXPECT_EQ(var_p(make({-1.0, 1.0}, {0.5, 0.5}), RiskLevel(0.25)), 1.0);
    EXPECT_EQ(var_p(make({-2.0, 0.0, 3.0}, {0.2, 0.3, 0.5}), RiskLevel(0.1)), 2.0);
    // F(x) > p is strict: at p = 0.5 the first atom no longer passes.
    EXPECT_EQ(var_p(make({-1.0, 1.0}, {0.5, 0.5}), RiskLevel(0.5)), -1.0);
    EXPECT_THROW((void)var_p(make({}, {}), RiskLevel(0.1)), std::invalid_argument);
}

TEST(EsP, HandIntegrals) {
    for (double p : {0.01, 0.5, 0.99}) EXPECT_DOUBLE_EQ(es_p(make({-3.5}, {1.0}), RiskLevel(p)), 3.5);
    EXPECT_DOUBLE_EQ(es_p(make({-1.0, 1.0}, {0.5, 0.5}), RiskLevel(0.5)), 1.0);
    // Atom straddling p: (0.2 * 2 + 0.1 * 0) / 0.3.
    EXPECT_NEAR(es_p(make({-2.0, 0.0, 3.0}, {0.2, 0.3, 0.5}), RiskLevel(0.3)), 0.4 / 0.3, 1e-15);
    // Unsorted input with ties gives the same answer.
    EXPECT_NEAR(es_p(make({3.0, 0.0, -2.0, 0.0}, {0.5, 0.15, 0.2, 0.15}), RiskLevel(0.3)), 0.4 / 0.3, 1e-15);
    EXPECT_THROW((void)es_p(make({1.0}, {0.5}), RiskLevel(0.1)), std::invalid_argument);
}

TEST(EsP, StandardNormalSampleAtOnePercent) {
    std::mt19937_64 rng(20140201);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = 1000000;
    WeightedSample s;
    s.values.resize(n);
    for (auto& v : s.values) v = normal(rng);
    s.weights = fixtures::uniform_weights(n);
    EXPECT_NEAR(es_p(s, RiskLevel(0.01)), 2.665, 0.02);
}

TEST(EsP, NormalLocationScale) {
    std::mt19937_64 rng(5);
    const double mu = 0.4, sigma = 2.5;
    std::normal_distribution<double> normal(mu, sigma);
    const std::size_t n = 400000;
    WeightedSample s;
    s.values.resize(n);
    for (auto& v : s.values) v = normal(rng);
    s.weights = fixtures::uniform_weights(n);
    // E(0.05) = phi(1.6448536) / 0.05.
    const double e05 = 2.0627128075074257;
    EXPECT_NEAR(es_p(s, RiskLevel(0.05)), sigma * e05 - mu, 0.03);
}

TEST(RuObjective, HandValues) {
    const auto s = make({-2.0, 1.0}, {0.5, 0.5});
    EXPECT_DOUBLE_EQ(ru_objective(s, RiskLevel(0.5), 2.0), 2.0);
    EXPECT_DOUBLE_EQ(ru_objective(make({-1.25}, {1.0}), RiskLevel(0.3), 1.25), 1.25);
    EXPECT_GT(ru_objective(s, RiskLevel(0.5), 1e6), 9e5);
    EXPECT_THROW(RiskLevel(0.0), std::invalid_argument);
}

TEST(RuObjective, MinimumIsEsAttainedAtVar) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const auto s = fixtures::random_sample(rng, 3 + trial * 7, trial % 2 == 0);
        for (double p : {0.05, 0.2, 0.5}) {
            const RiskLevel level(p);
            const double es = es_p(s, level);
            const double at_var = ru_objective(s, level, var_p(s, level));
            EXPECT_NEAR(at_var, es, 1e-9 * (1.0 + std::abs(es)));
            const double m = golden_min([&](double a) { return ru_objective(s, level, a); }, -10.0, 10.0);
            EXPECT_NEAR(m, es, 1e-7 * (1.0 + std::abs(es)));
        }
    }
}

TEST(EsP, OrderingProperties) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = fixtures::random_sample(rng, 40, trial % 3 == 0);
        double mean_loss = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) mean_loss -= s.weights[j] * s.values[j];
        double prev = INFINITY;
        for (double p : {0.01, 0.05, 0.1, 0.3, 0.6, 0.9}) {
            const RiskLevel level(p);
            const double es = es_p(s, level);
            EXPECT_GE(es + 1e-12, var_p(s, level));
            EXPECT_GE(es + 1e-12, mean_loss);
            EXPECT_LE(es, prev + 1e-12);
            prev = es;
        }
    }
}

TEST(EsP, NonPositiveSampleWithZeroEsIsZero) {
    EXPECT_EQ(es_p(make({0.0, 0.0}, {0.5, 0.5}), RiskLevel(0.9)), 0.0);
    EXPECT_GT(es_p(make({-1e-6, 0.0}, {0.01, 0.99}), RiskLevel(0.9)), 0.0);
}

TEST(Coherence, EsPassesExactShiftsAndScalings) {
    std::mt19937_64 rng(1);
    const auto x = fixtures::random_sample(rng, 25);
    const RiskLevel level(0.1);
    WeightedSample shifted = x, doubled = x;
    for (auto& v : shifted.values) v += 0.75;
    for (auto& v : doubled.values) v *= 2.0;
    EXPECT_NEAR(es_p(shifted, level), es_p(x, level) - 0.75, 1e-12);
    EXPECT_NEAR(es_p(doubled, level), 2.0 * es_p(x, level), 1e-12);

    const RiskFunctional es = [&](const WeightedSample& s) { return es_p(s, level); };
    const auto report = coherence_check(es, {x, shifted, doubled});
    EXPECT_TRUE(report.all_passed());
    EXPECT_EQ(report.axioms.size(), 5u);
}

TEST(Coherence, RandomPairsSubadditive) {
    std::mt19937_64 rng(2024);
    const RiskLevel level(0.05);
    const RiskFunctional es = [&](const WeightedSample& s) { return es_p(s, level); };
    for (int trial = 0; trial < 1000; ++trial) {
        auto x = fixtures::random_sample(rng, 12);
        auto y = fixtures::random_sample(rng, 12);
        y.weights = x.weights;
        WeightedSample sum = x;
        for (std::size_t j = 0; j < sum.size(); ++j) sum.values[j] += y.values[j];
        ASSERT_LE(es(sum), es(x) + es(y) + 1e-9);
    }
}

TEST(Coherence, VarFailsSubadditivity) {
    // Two independent-looking defaults: each alone has zero VaR at 5%, together they do not.
    const std::vector<double> w = fixtures::uniform_weights(25);
    WeightedSample a{std::vector<double>(25, 0.0), w}, b = a;
    a.values[0] = -100.0;
    b.values[1] = -100.0;
    const RiskLevel level(0.05);
    const RiskFunctional var = [&](const WeightedSample& s) { return var_p(s, level); };
    const auto report = coherence_check(var, {a, b});
    EXPECT_FALSE(report.axiom("subadditivity").passed);
    EXPECT_GT(report.axiom("subadditivity").worst_violation, 1.0);
    EXPECT_TRUE(report.axiom("translation").passed);
}

TEST(Coherence, RejectsMismatchedGrids) {
    const RiskFunctional es = [](const WeightedSample& s) { return es_p(s, RiskLevel(0.1)); };
    EXPECT_THROW((void)coherence_check(es, {make({1.0, 2.0}, {0.5, 0.5}), make({1.0, 2.0}, {0.3, 0.7})}),
                 std::invalid_argument);
}
