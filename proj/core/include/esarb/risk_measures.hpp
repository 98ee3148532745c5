#pragma once

#include <functional>
#include <string>
#include <vector>

#include "esarb/scenario_market.hpp"

namespace esarb {

/// Confidence level p in the open interval (0, 1).
class RiskLevel {
public:
    /// Throws std::invalid_argument("invalid level") outside (0, 1).
    explicit RiskLevel(double p);
    [[nodiscard]] double p() const noexcept { return p_; }

private:
    double p_;
};

/// Value at risk under the strict CDF convention: -inf{x : F(x) > p}.
[[nodiscard]] double var_p(const WeightedSample& sample, RiskLevel level);

/// Expected shortfall, exact on discrete samples (atoms at the p boundary are split).
[[nodiscard]] double es_p(const WeightedSample& sample, RiskLevel level);

/// alpha + (1/p) * E[(-X - alpha)^+]; minimized over alpha this equals es_p.
[[nodiscard]] double ru_objective(const WeightedSample& sample, RiskLevel level, double alpha);

using RiskFunctional = std::function<double(const WeightedSample&)>;

struct AxiomResult {
    std::string name;
    bool passed = true;
    double worst_violation = 0.0;
};

struct CoherenceReport {
    std::vector<AxiomResult> axioms;  ///< normalization, monotonicity, subadditivity, translation, homogeneity
    [[nodiscard]] bool all_passed() const;
    [[nodiscard]] const AxiomResult& axiom(const std::string& name) const;
};

/// Checks the five coherence axioms on the samples and on every pair of them.
/// All samples must share one weight vector; otherwise std::invalid_argument.
[[nodiscard]] CoherenceReport coherence_check(const RiskFunctional& measure,
                                              const std::vector<WeightedSample>& samples,
                                              double tolerance = 1e-9);

}  // namespace esarb
