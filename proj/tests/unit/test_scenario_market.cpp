#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "esarb/scenario_market.hpp"
#include "support.hpp"

using namespace esarb;

namespace {

ScenarioSet two_points() { return ScenarioSet({90.0, 110.0}, {0.5, 0.5}); }

const TradableLeg& leg(const std::vector<TradableLeg>& legs, const std::string& label) {
    for (const auto& l : legs) {
        if (l.label == label) return l;
    }
    throw std::out_of_range(label);
}

}  // namespace

TEST(ScenarioSet, RejectsBadInvariants) {
    EXPECT_THROW(ScenarioSet({1.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
    EXPECT_THROW(ScenarioSet({2.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
    EXPECT_THROW(ScenarioSet({1.0, 2.0}, {0.5, 0.6}), std::invalid_argument);
    EXPECT_THROW(ScenarioSet({1.0, 2.0}, {-0.1, 1.1}), std::invalid_argument);
    EXPECT_THROW(ScenarioSet({}, {}), std::invalid_argument);
    EXPECT_THROW(ScenarioSet({1.0, NAN}, {0.5, 0.5}), std::invalid_argument);
    try {
        ScenarioSet bad({1.0, 1.0}, {0.5, 0.5});
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "bad scenario set");
    }
}

TEST(ScenarioSet, FromDrawsMergesDuplicates) {
    const auto s = ScenarioSet::from_draws({3.0, 1.0, 3.0, 2.0});
    ASSERT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s.points()[0], 1.0);
    EXPECT_DOUBLE_EQ(s.weights()[2], 0.5);
    const auto one = ScenarioSet::from_draws({7.0});
    EXPECT_EQ(one.size(), 1u);
    EXPECT_EQ(one.weights()[0], 1.0);
}

TEST(ExpandQuotes, CallLongAndShortLegs) {
    const std::vector<InstrumentQuote> quotes{{InstrumentKind::call, 100.0, 4.0, 5.0},
                                              {InstrumentKind::bond, std::nullopt, 1.0, 1.0}};
    const auto legs = expand_quotes(quotes, two_points(), 100.0, 0.0, 1.0);
    const auto& lng = leg(legs, "call 100 long");
    const auto& sht = leg(legs, "call 100 short");
    EXPECT_EQ(lng.price, 5.0);
    EXPECT_EQ(lng.payoff, (std::vector<double>{0.0, 10.0}));
    EXPECT_EQ(sht.price, -4.0);
    EXPECT_EQ(sht.payoff, (std::vector<double>{0.0, -10.0}));
}

TEST(ExpandQuotes, ZeroRateBond) {
    const std::vector<InstrumentQuote> quotes{{InstrumentKind::bond, std::nullopt, 1.0, 1.0}};
    const auto legs = expand_quotes(quotes, two_points(), 100.0, 0.0, 1.0);
    ASSERT_EQ(legs.size(), 2u);
    EXPECT_EQ(leg(legs, "bond long").payoff, (std::vector<double>{1.0, 1.0}));
    EXPECT_EQ(leg(legs, "bond long").price, 1.0);
    EXPECT_EQ(leg(legs, "bond short").payoff, (std::vector<double>{-1.0, -1.0}));
    EXPECT_EQ(leg(legs, "bond short").price, -1.0);
}

TEST(ExpandQuotes, PutPayoffAndSynthesizedBond) {
    const std::vector<InstrumentQuote> quotes{{InstrumentKind::put, 100.0, 2.0, 3.0}};
    const auto legs = expand_quotes(quotes, two_points(), 100.0, 0.05, 2.0);
    EXPECT_EQ(leg(legs, "put 100 long").payoff, (std::vector<double>{10.0, 0.0}));
    EXPECT_EQ(leg(legs, "put 100 long").price, 3.0);
    EXPECT_NEAR(leg(legs, "bond long").price, std::exp(-0.1), 1e-15);
    EXPECT_NEAR(leg(legs, "bond short").price, -std::exp(-0.1), 1e-15);
}

TEST(ExpandQuotes, ZeroBidAndMissingAsk) {
    const std::vector<InstrumentQuote> quotes{
        {InstrumentKind::call, 120.0, 0.0, 0.5},
        {InstrumentKind::underlying, std::nullopt, 99.0, std::numeric_limits<double>::infinity()}};
    const auto legs = expand_quotes(quotes, two_points(), 100.0, 0.0, 1.0);
    EXPECT_NO_THROW(leg(legs, "call 120 long"));
    EXPECT_THROW(leg(legs, "call 120 short"), std::out_of_range);
    EXPECT_THROW(leg(legs, "underlying long"), std::out_of_range);
    EXPECT_EQ(leg(legs, "underlying short").payoff, (std::vector<double>{-90.0, -110.0}));
}

TEST(ExpandQuotes, Errors) {
    try {
        (void)expand_quotes({}, two_points(), 100.0, 0.0, 1.0);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "no instruments");
    }
    InstrumentQuote bad{InstrumentKind::call, 100.0, 5.0, 4.0};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    InstrumentQuote nostrike{InstrumentKind::call, std::nullopt, 1.0, 2.0};
    EXPECT_THROW(nostrike.validate(), std::invalid_argument);
}

TEST(Pricing, HandArithmetic) {
    const std::vector<InstrumentQuote> quotes{{InstrumentKind::call, 100.0, 4.0, 5.0},
                                              {InstrumentKind::bond, std::nullopt, 1.0, 1.0}};
    const auto market = make_market(quotes, two_points(), 100.0, 0.0, 1.0);
    const auto n = market.leg_count();
    EXPECT_EQ(price(market, Portfolio::zeros(n)), 0.0);

    std::vector<double> q(n, 0.0);
    q[*market.find_leg("call 100 long")] = 1.0;
    EXPECT_EQ(price(market, Portfolio(q)), 5.0);
    EXPECT_EQ(payoff_distribution(market, Portfolio(q)).values, (std::vector<double>{0.0, 10.0}));

    q[*market.find_leg("call 100 long")] = 0.5;
    q[*market.find_leg("call 100 short")] = 0.5;
    EXPECT_DOUBLE_EQ(price(market, Portfolio(q)), 0.5);
    EXPECT_EQ(payoff_distribution(market, Portfolio(q)).values, (std::vector<double>{0.0, 0.0}));

    const auto zero = payoff_distribution(market, Portfolio::zeros(n));
    EXPECT_EQ(zero.values, (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(zero.weights, (std::vector<double>{0.5, 0.5}));
    EXPECT_THROW((void)price(market, Portfolio::zeros(n + 1)), std::invalid_argument);
    EXPECT_THROW((void)payoff_distribution(market, Portfolio::zeros(1)), std::invalid_argument);
}

TEST(Pricing, HomogeneousAdditiveAndLinear) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<InstrumentQuote> quotes;
    for (double k : {80.0, 95.0, 100.0, 105.0, 120.0}) {
        quotes.push_back({InstrumentKind::call, k, 1.0 + unif(rng), 3.0 + unif(rng)});
        quotes.push_back({InstrumentKind::put, k, 1.0 + unif(rng), 3.0 + unif(rng)});
    }
    std::vector<double> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(60.0 + 2.0 * i);
    const auto market = make_market(quotes, ScenarioSet(pts, fixtures::uniform_weights(pts.size())), 100.0, 0.01, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(market.leg_count()), b(market.leg_count());
        for (auto& v : a) v = unif(rng);
        for (auto& v : b) v = unif(rng);
        const Portfolio x(a), y(b);
        const double lambda = 10.0 * unif(rng);
        EXPECT_NEAR(price(market, x.scaled(lambda)), lambda * price(market, x), 1e-12 * (1 + lambda));
        EXPECT_NEAR(price(market, x.combined(y, 1.0)), price(market, x) + price(market, y), 1e-12);
        const auto px = payoff_distribution(market, x);
        const auto py = payoff_distribution(market, y);
        const auto pxy = payoff_distribution(market, x.combined(y, lambda));
        for (std::size_t j = 0; j < pts.size(); ++j) {
            EXPECT_NEAR(pxy.values[j], px.values[j] + lambda * py.values[j], 1e-10);
        }
    }
    for (std::size_t i = 0; i + 1 < market.leg_count(); i += 2) {
        const auto& lng = market.legs()[i];
        const auto& sht = market.legs()[i + 1];
        EXPECT_GE(lng.price, -sht.price);
    }
}

TEST(Portfolio, RejectsNegativeQuantities) {
    EXPECT_THROW(Portfolio({1.0, -0.5}), std::invalid_argument);
    EXPECT_THROW((void)Portfolio({1.0}).combined(Portfolio({1.0}), -1.0), std::invalid_argument);
}

TEST(MarketSnapshot, ScaledMultipliesPricesAndPayoffs) {
    const std::vector<InstrumentQuote> quotes{{InstrumentKind::call, 100.0, 4.0, 5.0}};
    const auto market = make_market(quotes, two_points(), 100.0, 0.0, 1.0);
    const auto big = market.scaled(3.0);
    EXPECT_EQ(big.legs()[0].price, 3.0 * market.legs()[0].price);
    EXPECT_EQ(big.legs()[0].payoff[1], 3.0 * market.legs()[0].payoff[1]);
    EXPECT_EQ(big.max_abs_payoff(), 3.0 * market.max_abs_payoff());
}
