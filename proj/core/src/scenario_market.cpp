#include "esarb/scenario_market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "numeric_util.hpp"

namespace esarb {

ScenarioSet::ScenarioSet(std::vector<double> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty() || points_.size() != weights_.size()) {
        throw std::invalid_argument("bad scenario set");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i]) || !std::isfinite(weights_[i]) || weights_[i] < 0.0) {
            throw std::invalid_argument("bad scenario set");
        }
        if (i > 0 && !(points_[i] > points_[i - 1])) {
            throw std::invalid_argument("bad scenario set");
        }
    }
    if (std::abs(detail::neumaier_sum(weights_) - 1.0) > 1e-12) {
        throw std::invalid_argument("bad scenario set");
    }
}

ScenarioSet ScenarioSet::from_draws(std::vector<double> draws) {
    if (draws.empty()) {
        throw std::invalid_argument("bad scenario set");
    }
    std::sort(draws.begin(), draws.end());
    const double unit = 1.0 / static_cast<double>(draws.size());
    std::vector<double> points;
    std::vector<std::size_t> counts;
    points.reserve(draws.size());
    counts.reserve(draws.size());
    for (double d : draws) {
        if (!points.empty() && points.back() == d) {
            ++counts.back();
        } else {
            points.push_back(d);
            counts.push_back(1);
        }
    }
    std::vector<double> weights(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        weights[i] = static_cast<double>(counts[i]) * unit;
    }
    // 1/n rounding can leave the total a few ulps off; push it onto the largest weight.
    const double total = detail::neumaier_sum(weights);
    auto largest = std::max_element(weights.begin(), weights.end());
    *largest += 1.0 - total;
    return ScenarioSet(std::move(points), std::move(weights));
}

std::string to_string(InstrumentKind kind) {
    switch (kind) {
        case InstrumentKind::call: return "call";
        case InstrumentKind::put: return "put";
        case InstrumentKind::bond: return "bond";
        case InstrumentKind::underlying: return "underlying";
    }
    return "unknown";
}

InstrumentKind parse_instrument_kind(const std::string& text) {
    if (text == "call") return InstrumentKind::call;
    if (text == "put") return InstrumentKind::put;
    if (text == "bond") return InstrumentKind::bond;
    if (text == "underlying") return InstrumentKind::underlying;
    throw std::invalid_argument("unknown instrument kind: " + text);
}

void InstrumentQuote::validate() const {
    if (std::isnan(bid) || std::isnan(ask) || !std::isfinite(bid) || bid < 0.0 || ask < bid) {
        throw std::invalid_argument("invalid quote: require ask >= bid >= 0");
    }
    const bool option = kind == InstrumentKind::call || kind == InstrumentKind::put;
    if (option && (!strike || !(*strike > 0.0) || !std::isfinite(*strike))) {
        throw std::invalid_argument("invalid quote: option strike must be positive");
    }
    if (!option && strike) {
        throw std::invalid_argument("invalid quote: strike given for " + to_string(kind));
    }
}

double instrument_payoff(const InstrumentQuote& quote, double s) {
    switch (quote.kind) {
        case InstrumentKind::call: return std::max(s - *quote.strike, 0.0);
        case InstrumentKind::put: return std::max(*quote.strike - s, 0.0);
        case InstrumentKind::bond: return 1.0;
        case InstrumentKind::underlying: return s;
    }
    return 0.0;
}

Portfolio::Portfolio(std::vector<double> quantities) : quantities_(std::move(quantities)) {
    for (double q : quantities_) {
        if (!(q >= 0.0) || !std::isfinite(q)) {
            throw std::invalid_argument("portfolio quantities must be finite and non-negative");
        }
    }
}

Portfolio Portfolio::combined(const Portfolio& other, double scale) const {
    if (other.size() != size()) {
        throw std::invalid_argument("portfolio dimension mismatch");
    }
    if (!(scale >= 0.0)) {
        throw std::invalid_argument("portfolio scale must be non-negative");
    }
    std::vector<double> q(quantities_);
    for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] += scale * other.quantities_[i];
    }
    return Portfolio(std::move(q));
}

Portfolio Portfolio::scaled(double factor) const {
    return Portfolio::zeros(size()).combined(*this, factor);
}

MarketSnapshot::MarketSnapshot(ScenarioSet scenarios, std::vector<TradableLeg> legs,
                               double spot, double rate, double maturity)
    : scenarios_(std::move(scenarios)), legs_(std::move(legs)),
      spot_(spot), rate_(rate), maturity_(maturity) {
    if (legs_.empty()) {
        throw std::invalid_argument("no instruments");
    }
    if (scenarios_.empty()) {
        throw std::invalid_argument("bad scenario set");
    }
    for (const auto& leg : legs_) {
        if (leg.payoff.size() != scenarios_.size()) {
            throw std::invalid_argument("leg payoff length differs from scenario count: " + leg.label);
        }
        if (!std::isfinite(leg.price)) {
            throw std::invalid_argument("leg price must be finite: " + leg.label);
        }
        for (double v : leg.payoff) {
            max_abs_payoff_ = std::max(max_abs_payoff_, std::abs(v));
        }
    }
}

std::optional<std::size_t> MarketSnapshot::find_leg(const std::string& label) const {
    for (std::size_t i = 0; i < legs_.size(); ++i) {
        if (legs_[i].label == label) return i;
    }
    return std::nullopt;
}

MarketSnapshot MarketSnapshot::scaled(double factor) const {
    if (!(factor > 0.0)) {
        throw std::invalid_argument("scale factor must be positive");
    }
    std::vector<TradableLeg> legs(legs_.begin(), legs_.end());
    for (auto& leg : legs) {
        leg.price *= factor;
        for (double& v : leg.payoff) v *= factor;
    }
    return MarketSnapshot(scenarios_, std::move(legs), spot_ * factor, rate_, maturity_);
}

MarketSnapshot MarketSnapshot::with_leg(TradableLeg leg) const {
    std::vector<TradableLeg> legs(legs_.begin(), legs_.end());
    legs.push_back(std::move(leg));
    return MarketSnapshot(scenarios_, std::move(legs), spot_, rate_, maturity_);
}

namespace {

std::string quote_name(const InstrumentQuote& q) {
    if (!q.strike) return to_string(q.kind);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s %.10g", to_string(q.kind).c_str(), *q.strike);
    return buf;
}

}  // namespace

std::vector<TradableLeg> expand_quotes(const std::vector<InstrumentQuote>& quotes,
                                       const ScenarioSet& scenarios,
                                       double spot, double rate, double maturity) {
    if (quotes.empty()) {
        throw std::invalid_argument("no instruments");
    }
    if (scenarios.empty()) {
        throw std::invalid_argument("bad scenario set");
    }
    (void)spot;
    std::vector<InstrumentQuote> all(quotes);
    const bool has_bond = std::any_of(all.begin(), all.end(),
                                      [](const InstrumentQuote& q) { return q.kind == InstrumentKind::bond; });
    if (!has_bond) {
        const double df = std::exp(-rate * maturity);
        all.push_back(InstrumentQuote{InstrumentKind::bond, std::nullopt, df, df});
    }

    std::vector<TradableLeg> legs;
    std::map<std::string, int> seen;
    auto unique_label = [&seen](std::string base) {
        const int n = ++seen[base];
        if (n > 1) base += " #" + std::to_string(n);
        return base;
    };
    const auto pts = scenarios.points();
    for (const auto& q : all) {
        q.validate();
        std::vector<double> pay(pts.size());
        for (std::size_t j = 0; j < pts.size(); ++j) {
            pay[j] = instrument_payoff(q, pts[j]);
        }
        const std::string name = quote_name(q);
        if (std::isfinite(q.ask)) {
            legs.push_back(TradableLeg{unique_label(name + " long"), q.ask, pay});
        }
        if (q.bid > 0.0) {
            std::vector<double> neg(pay.size());
            for (std::size_t j = 0; j < pay.size(); ++j) neg[j] = -pay[j];
            legs.push_back(TradableLeg{unique_label(name + " short"), -q.bid, std::move(neg)});
        }
    }
    return legs;
}

MarketSnapshot make_market(const std::vector<InstrumentQuote>& quotes, ScenarioSet scenarios,
                           double spot, double rate, double maturity) {
    auto legs = expand_quotes(quotes, scenarios, spot, rate, maturity);
    return MarketSnapshot(std::move(scenarios), std::move(legs), spot, rate, maturity);
}

double price(const MarketSnapshot& market, const Portfolio& portfolio) {
    if (portfolio.size() != market.leg_count()) {
        throw std::invalid_argument("portfolio dimension mismatch");
    }
    const auto legs = market.legs();
    double total = 0.0;
    for (std::size_t i = 0; i < legs.size(); ++i) {
        total += legs[i].price * portfolio[i];
    }
    return total;
}

WeightedSample payoff_distribution(const MarketSnapshot& market, const Portfolio& portfolio) {
    if (portfolio.size() != market.leg_count()) {
        throw std::invalid_argument("portfolio dimension mismatch");
    }
    const auto w = market.scenarios().weights();
    WeightedSample out;
    out.values.assign(w.size(), 0.0);
    out.weights.assign(w.begin(), w.end());
    const auto legs = market.legs();
    for (std::size_t i = 0; i < legs.size(); ++i) {
        const double q = portfolio[i];
        if (q == 0.0) continue;
        const auto& pay = legs[i].payoff;
        for (std::size_t j = 0; j < pay.size(); ++j) {
            out.values[j] += q * pay[j];
        }
    }
    return out;
}

}  // namespace esarb
