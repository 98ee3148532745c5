#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "esarb/risk_measures.hpp"
#include "esarb/scenario_market.hpp"

namespace esarb {

/// Expected shortfall of a standard normal variable, phi(Phi^-1(p)) / p.
[[nodiscard]] double normal_es(RiskLevel level);

/// Risky assets with jointly normal payoffs plus one implied risk-free
/// asset of price 1 and payoff 1 + rf.
struct MarkowitzMarket {
    std::vector<double> mu;
    std::vector<std::vector<double>> sigma;
    std::vector<double> c;
    double rf = 0.0;

    /// Throws std::invalid_argument on size mismatch, asymmetry or a
    /// covariance that is not positive semidefinite within 1e-10.
    void validate() const;
};

/// sqrt(m' Sigma^-1 m) with m = mu - (1 + rf) c. Throws
/// std::invalid_argument("degenerate risky assets") when Sigma is singular
/// (smallest eigenvalue at most 1e-10 times the largest).
[[nodiscard]] double capital_line_gradient(const MarkowitzMarket& market);

enum class MarkowitzReason { gradient, negative_gross_rf, none };

[[nodiscard]] std::string to_string(MarkowitzReason reason);

struct MarkowitzVerdict {
    bool arbitrage = false;
    MarkowitzReason reason = MarkowitzReason::none;
    double gradient = 0.0;
    double threshold = 0.0;  ///< normal_es(p)
};

/// Requires p < 0.5; otherwise std::invalid_argument("theorem hypothesis violated").
[[nodiscard]] MarkowitzVerdict markowitz_arbitrage(const MarkowitzMarket& market, RiskLevel level);

/// Monte Carlo discretization: n equally weighted joint normal draws, one
/// long and one short leg per risky asset and for the risk-free asset.
[[nodiscard]] MarketSnapshot markowitz_scenario_market(const MarkowitzMarket& market, std::size_t n,
                                                       std::uint64_t seed);

/// Non-increasing density ratio q(u) on [0, 1], piecewise linear between
/// nodes. Two consecutive nodes with equal u encode a jump.
class CompleteMarketDensity {
public:
    /// Throws std::invalid_argument on unordered u, increasing q, negative q,
    /// u outside [0, 1] or a total mass differing from 1 by more than 1e-10.
    CompleteMarketDensity(std::vector<double> u, std::vector<double> q, double rate, double horizon);

    /// Step function taking values[k] on (edges[k], edges[k+1]).
    [[nodiscard]] static CompleteMarketDensity step(const std::vector<double>& edges,
                                                    const std::vector<double>& values,
                                                    double rate, double horizon);

    [[nodiscard]] const std::vector<double>& u() const noexcept { return u_; }
    [[nodiscard]] const std::vector<double>& q() const noexcept { return q_; }
    [[nodiscard]] double rate() const noexcept { return rate_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }

    /// q(0+), the essential supremum.
    [[nodiscard]] double sup() const noexcept { return q_.front(); }
    /// True when q equals its supremum on an interval of positive length.
    [[nodiscard]] bool sup_attained() const noexcept;
    /// Right-continuous evaluation.
    [[nodiscard]] double value(double u) const;
    /// Integral of q over [a, b], 0 <= a <= b <= 1.
    [[nodiscard]] double integral(double a, double b) const;
    /// Spacing of the coarsest interval between distinct nodes.
    [[nodiscard]] double max_spacing() const;

private:
    std::vector<double> u_;
    std::vector<double> q_;
    double rate_;
    double horizon_;
};

[[nodiscard]] bool complete_market_arbitrage(const CompleteMarketDensity& density, RiskLevel level);

struct StepArbitrageCandidate {
    RiskLevel level{0.5};
    double alpha = 0.0;
    double beta = 0.0;
    double p_tilde = 0.0;
};

struct StepCandidateResult {
    StepArbitrageCandidate candidate;
    double price = 0.0;
    bool arbitrage = false;  ///< price <= 0
};

/// Payoff alpha below p_tilde and beta above, priced under the density.
[[nodiscard]] StepCandidateResult step_candidate(const CompleteMarketDensity& density, RiskLevel level,
                                                 double alpha, double beta);

/// Value of the step payoff at uniform state u.
[[nodiscard]] double step_payoff(const StepArbitrageCandidate& candidate, double u);

struct BlackScholesParams {
    double drift = 0.0;
    double vol = 0.2;
    double rate = 0.0;
    double maturity = 1.0;
};

/// Tabulated decreasing rearrangement of the Black-Scholes density ratio as
/// a step function of exact cell averages. Cells are uniform of width
/// 1/cells, with the first one split geometrically down to u_min, so the
/// tabulated supremum grows as u_min shrinks.
[[nodiscard]] CompleteMarketDensity black_scholes_density(const BlackScholesParams& params,
                                                          std::size_t cells, double u_min);

enum class CellWeighting { exact, monte_carlo };

struct CompleteMarketGrid {
    std::size_t refine = 0;  ///< extra uniform cells merged with the density nodes
    CellWeighting weighting = CellWeighting::exact;
    std::size_t draws = 0;   ///< for monte_carlo
    std::uint64_t seed = 0;
};

/// One cell per interval between density nodes and refinement points; an
/// Arrow-Debreu long/short pair per cell plus a bond pair. Scenario points
/// are cell midpoints in u.
[[nodiscard]] MarketSnapshot complete_market_snapshot(const CompleteMarketDensity& density,
                                                      const CompleteMarketGrid& grid = {});

}  // namespace esarb
