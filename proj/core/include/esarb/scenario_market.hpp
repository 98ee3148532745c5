#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace esarb {

/// A discrete probability distribution over terminal states.
///
/// Points are either terminal values of a single underlying or abstract
/// state labels; in both cases they are stored strictly increasing.
class ScenarioSet {
public:
    ScenarioSet() = default;

    /// Throws std::invalid_argument("bad scenario set") on any violated invariant.
    ScenarioSet(std::vector<double> points, std::vector<double> weights);

    /// Equal-weight set; points are sorted and exact duplicates merged.
    static ScenarioSet from_draws(std::vector<double> draws);

    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] bool empty() const noexcept { return points_.empty(); }
    [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }

private:
    std::vector<double> points_;
    std::vector<double> weights_;
};

enum class InstrumentKind { call, put, bond, underlying };

[[nodiscard]] std::string to_string(InstrumentKind kind);
/// Parses "call", "put", "bond" or "underlying".
[[nodiscard]] InstrumentKind parse_instrument_kind(const std::string& text);

struct InstrumentQuote {
    InstrumentKind kind = InstrumentKind::call;
    std::optional<double> strike;
    double bid = 0.0;
    double ask = 0.0;  ///< +inf when there is no offer

    /// Throws std::invalid_argument when ask < bid, bid < 0, or the strike is
    /// missing/non-positive for an option.
    void validate() const;
};

/// Payoff of one unit of the instrument when the underlying ends at `s`.
[[nodiscard]] double instrument_payoff(const InstrumentQuote& quote, double s);

struct TradableLeg {
    std::string label;
    double price = 0.0;           ///< negative for short legs
    std::vector<double> payoff;   ///< one entry per scenario
};

/// Portfolio of non-negative leg quantities.
class Portfolio {
public:
    Portfolio() = default;
    explicit Portfolio(std::vector<double> quantities);

    static Portfolio zeros(std::size_t legs) { return Portfolio(std::vector<double>(legs, 0.0)); }

    [[nodiscard]] std::size_t size() const noexcept { return quantities_.size(); }
    [[nodiscard]] std::span<const double> quantities() const noexcept { return quantities_; }
    [[nodiscard]] double operator[](std::size_t i) const { return quantities_[i]; }

    /// Component-wise `*this + scale * other`; scale must be non-negative.
    [[nodiscard]] Portfolio combined(const Portfolio& other, double scale) const;
    [[nodiscard]] Portfolio scaled(double factor) const;

private:
    std::vector<double> quantities_;
};

/// Value/weight pairs describing a discrete random variable.
struct WeightedSample {
    std::vector<double> values;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// A positive-homogeneous market: linear prices over non-negative leg
/// quantities, payoff evaluated on a ScenarioSet.
class MarketSnapshot {
public:
    MarketSnapshot(ScenarioSet scenarios, std::vector<TradableLeg> legs,
                   double spot, double rate, double maturity);

    [[nodiscard]] const ScenarioSet& scenarios() const noexcept { return scenarios_; }
    [[nodiscard]] std::span<const TradableLeg> legs() const noexcept { return legs_; }
    [[nodiscard]] std::size_t leg_count() const noexcept { return legs_.size(); }
    [[nodiscard]] std::size_t scenario_count() const noexcept { return scenarios_.size(); }
    [[nodiscard]] double spot() const noexcept { return spot_; }
    [[nodiscard]] double rate() const noexcept { return rate_; }
    [[nodiscard]] double maturity() const noexcept { return maturity_; }

    /// Largest |payoff| over all legs and scenarios.
    [[nodiscard]] double max_abs_payoff() const noexcept { return max_abs_payoff_; }

    /// Index of the leg with this label, if any.
    [[nodiscard]] std::optional<std::size_t> find_leg(const std::string& label) const;

    /// Copy with every price and payoff multiplied by `factor` > 0.
    [[nodiscard]] MarketSnapshot scaled(double factor) const;
    /// Copy with an extra leg appended.
    [[nodiscard]] MarketSnapshot with_leg(TradableLeg leg) const;

private:
    ScenarioSet scenarios_;
    std::vector<TradableLeg> legs_;
    double spot_;
    double rate_;
    double maturity_;
    double max_abs_payoff_ = 0.0;
};

/// Expands quotes into long legs (price = ask) and short legs
/// (negated payoff, price = -bid). A fair bond is synthesized when no bond
/// quote is present.
[[nodiscard]] std::vector<TradableLeg> expand_quotes(const std::vector<InstrumentQuote>& quotes,
                                                     const ScenarioSet& scenarios,
                                                     double spot, double rate, double maturity);

/// Convenience: expand_quotes plus MarketSnapshot construction.
[[nodiscard]] MarketSnapshot make_market(const std::vector<InstrumentQuote>& quotes,
                                         ScenarioSet scenarios,
                                         double spot, double rate, double maturity);

[[nodiscard]] double price(const MarketSnapshot& market, const Portfolio& portfolio);

[[nodiscard]] WeightedSample payoff_distribution(const MarketSnapshot& market,
                                                 const Portfolio& portfolio);

}  // namespace esarb
