#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "esarb/risk_measures.hpp"
#include "esarb/scenario_market.hpp"

namespace esarb {

enum class UtilityKind { limited_liability, s_shaped_power, risk_manager_power };

/// limited_liability: x^+.
/// s_shaped_power: c1 x^a1 for gains, -c2 (-x)^a2 for losses.
/// risk_manager_power: 0 for gains, -(-x)^eta for losses.
struct UtilitySpec {
    UtilityKind kind = UtilityKind::limited_liability;
    double c1 = 1.0;
    double c2 = 1.0;
    double a1 = 1.0;
    double a2 = 0.5;
    double eta = 2.0;

    /// Throws std::invalid_argument unless c1 > 0, c2 >= 0, 0 < a2 < a1 <= 1
    /// (s_shaped_power) or eta > 1 (risk_manager_power).
    void validate() const;
    [[nodiscard]] double operator()(double x) const;
    /// Round-trips through parse_utility_spec.
    [[nodiscard]] std::string label() const;

    static UtilitySpec limited_liability() { return {}; }
    static UtilitySpec s_shaped(double c1, double c2, double a1, double a2);
    static UtilitySpec risk_manager(double eta);
};

/// "limited_liability", "s_shaped_power:C1:C2:a1:a2" or "risk_manager_power:eta".
[[nodiscard]] UtilitySpec parse_utility_spec(const std::string& text);

[[nodiscard]] double expected_utility(const WeightedSample& sample, const UtilitySpec& spec);

struct ScanRow {
    double lambda = 0.0;
    std::string spec;
    double expected_utility = 0.0;
    double price = 0.0;
    double es_p = 0.0;
};

/// Utilities of payoff(base) + lambda payoff(ray) for every lambda and spec,
/// with the price and ES of the combined position.
[[nodiscard]] std::vector<ScanRow> scaling_scan(const MarketSnapshot& market, const Portfolio& base,
                                                const Portfolio& ray, const std::vector<double>& lambdas,
                                                const std::vector<UtilitySpec>& specs, RiskLevel level);

struct ConstraintRow {
    double cap = 0.0;
    double best_value = 0.0;        ///< E(x^+) of the best portfolio found
    double constraint_value = 0.0;  ///< E(u_R) at that portfolio
    double price = 0.0;
    Portfolio portfolio;
};

struct ConstraintSearch {
    std::size_t starts = 20;
    std::uint64_t seed = 0;
};

/// Maximizes E(payoff^+) over 0 <= x <= cap, price <= 0 and
/// E(u_R(payoff)) >= floor, for each cap. Throws
/// std::invalid_argument("floor excludes zero portfolio") when floor > 0.
[[nodiscard]] std::vector<ConstraintRow> classic_constraint_sup(const MarketSnapshot& market,
                                                                const UtilitySpec& constraint, double floor,
                                                                const std::vector<double>& caps,
                                                                const ConstraintSearch& search = {});

}  // namespace esarb
