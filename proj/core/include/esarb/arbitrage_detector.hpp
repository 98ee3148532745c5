#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "esarb/lp.hpp"
#include "esarb/risk_measures.hpp"
#include "esarb/scenario_market.hpp"

namespace esarb {

struct DetectionOptions {
    double cost_cap = 0.0;
    double upper_bound = 1.0;
    /// Overrides the default strict-negativity threshold when set.
    std::optional<double> epsilon;
};

/// Variables are ordered (alpha, x_1..x_NI, u_1..u_NQ); row 0 is the cost
/// row, rows 1..NQ are the hinge rows.
[[nodiscard]] LpProblem build_lp(const MarketSnapshot& market, RiskLevel level,
                                 double cost_cap = 0.0, double upper_bound = 1.0);

/// `build_lp` plus the row E[X] >= threshold.
[[nodiscard]] LpProblem build_threshold_lp(const MarketSnapshot& market, RiskLevel level, double threshold,
                                           double cost_cap = 0.0, double upper_bound = 1.0);

/// Maximizes expected payoff over portfolios whose expected shortfall is at most zero.
[[nodiscard]] LpProblem build_confirmation_lp(const MarketSnapshot& market, RiskLevel level,
                                              double cost_cap = 0.0, double upper_bound = 1.0);

/// 1e-6 times the larger of spot and the largest absolute payoff.
[[nodiscard]] double arbitrage_epsilon(const MarketSnapshot& market);

/// Second stage run when the minimal shortfall is not clearly negative.
struct Confirmation {
    double threshold = 0.0;
    /// Smallest shortfall among portfolios with E[X] >= threshold; unset when there are none.
    std::optional<double> min_es_at_threshold;
    /// Filled only for a confirmed arbitrage.
    std::optional<double> max_expected_payoff;
};

struct DetectionResult {
    RiskLevel level{0.5};
    /// Optimal shortfall when it is below -epsilon, otherwise 0.
    double min_es = 0.0;
    Portfolio portfolio;
    double alpha_star = 0.0;
    bool arbitrage = false;
    std::optional<Confirmation> confirmation;
    double epsilon = 0.0;
};

[[nodiscard]] DetectionResult detect(const MarketSnapshot& market, RiskLevel level,
                                     const DetectionOptions& options = {});

enum class MinPOutcome { found, none_in_bracket, at_or_below_bracket };

[[nodiscard]] std::string to_string(MinPOutcome outcome);

struct MinPResult {
    MinPOutcome outcome = MinPOutcome::none_in_bracket;
    std::optional<double> p_star;
    double p_lo = 0.0;
    double p_hi = 0.0;
    std::size_t evaluations = 0;
};

/// Bisects the monotone arbitrage predicate on (p_lo, p_hi).
[[nodiscard]] MinPResult min_p(const MarketSnapshot& market, double p_lo = 1e-4, double p_hi = 0.5,
                               double tol = 1e-4, const DetectionOptions& options = {});

}  // namespace esarb
