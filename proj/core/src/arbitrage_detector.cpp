#include "esarb/arbitrage_detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace esarb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
/// Relative slack on the zero shortfall bound in the threshold LP.
constexpr double kConfirmTol = 1e-9;

LpProblem skeleton(const MarketSnapshot& market, double cost_cap, double upper_bound) {
    if (market.leg_count() == 0 || market.scenario_count() == 0) {
        throw std::invalid_argument("empty market");
    }
    if (!(upper_bound > 0.0) || !std::isfinite(upper_bound)) {
        throw std::invalid_argument("upper bound must be positive and finite");
    }
    if (!std::isfinite(cost_cap)) {
        throw std::invalid_argument("cost cap must be finite");
    }
    const std::size_t ni = market.leg_count();
    const std::size_t nq = market.scenario_count();
    const std::size_t n = 1 + ni + nq;

    LpProblem lp;
    lp.objective.assign(n, 0.0);
    lp.lower.assign(n, 0.0);
    lp.upper.assign(n, kInf);
    lp.lower[0] = -kInf;
    for (std::size_t i = 0; i < ni; ++i) lp.upper[1 + i] = upper_bound;
    lp.roles = VariableRoles{0, 1, ni, 1 + ni, nq};

    const auto legs = market.legs();
    LpRow cost;
    for (std::size_t i = 0; i < ni; ++i) {
        cost.index.push_back(1 + i);
        cost.coef.push_back(legs[i].price);
    }
    cost.upper = cost_cap;
    lp.rows.reserve(1 + nq);
    lp.rows.push_back(std::move(cost));

    for (std::size_t j = 0; j < nq; ++j) {
        LpRow hinge;
        hinge.index.reserve(ni + 2);
        hinge.coef.reserve(ni + 2);
        hinge.index.push_back(0);
        hinge.coef.push_back(-1.0);
        for (std::size_t i = 0; i < ni; ++i) {
            const double f = legs[i].payoff[j];
            if (f == 0.0) continue;
            hinge.index.push_back(1 + i);
            hinge.coef.push_back(-f);
        }
        hinge.index.push_back(1 + ni + j);
        hinge.coef.push_back(-1.0);
        hinge.upper = 0.0;
        lp.rows.push_back(std::move(hinge));
    }
    return lp;
}

Portfolio extract_portfolio(const std::vector<double>& z, std::size_t ni, double upper_bound) {
    std::vector<double> q(ni);
    for (std::size_t i = 0; i < ni; ++i) q[i] = std::clamp(z[1 + i], 0.0, upper_bound);
    return Portfolio(std::move(q));
}

std::vector<double> leg_means(const MarketSnapshot& market) {
    const auto w = market.scenarios().weights();
    const auto legs = market.legs();
    std::vector<double> means(legs.size(), 0.0);
    for (std::size_t i = 0; i < legs.size(); ++i) {
        for (std::size_t j = 0; j < w.size(); ++j) means[i] += w[j] * legs[i].payoff[j];
    }
    return means;
}

LpSolution solve_checked(const LpProblem& lp) {
    auto sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) {
        throw LpNumericalError("detection LP reported " + to_string(sol.status));
    }
    return sol;
}

/// Largest E[X] over the price row and the box.
double best_mean(const MarketSnapshot& market, double cost_cap, double upper_bound) {
    const auto means = leg_means(market);
    const auto legs = market.legs();
    LpProblem lp;
    lp.objective.resize(means.size());
    lp.lower.assign(means.size(), 0.0);
    lp.upper.assign(means.size(), upper_bound);
    LpRow cost;
    for (std::size_t i = 0; i < means.size(); ++i) {
        lp.objective[i] = -means[i];
        cost.index.push_back(i);
        cost.coef.push_back(legs[i].price);
    }
    cost.upper = cost_cap;
    lp.rows.push_back(std::move(cost));
    return -solve_checked(lp).objective;
}

}  // namespace

LpProblem build_lp(const MarketSnapshot& market, RiskLevel level, double cost_cap, double upper_bound) {
    LpProblem lp = skeleton(market, cost_cap, upper_bound);
    const auto w = market.scenarios().weights();
    const std::size_t ni = market.leg_count();
    lp.objective[0] = 1.0;
    for (std::size_t j = 0; j < w.size(); ++j) lp.objective[1 + ni + j] = w[j] / level.p();
    return lp;
}

LpProblem build_threshold_lp(const MarketSnapshot& market, RiskLevel level, double threshold, double cost_cap,
                             double upper_bound) {
    if (!std::isfinite(threshold)) throw std::invalid_argument("threshold must be finite");
    LpProblem lp = build_lp(market, level, cost_cap, upper_bound);
    const auto means = leg_means(market);
    LpRow floor;
    for (std::size_t i = 0; i < means.size(); ++i) {
        if (means[i] == 0.0) continue;
        floor.index.push_back(1 + i);
        floor.coef.push_back(-means[i]);
    }
    floor.upper = -threshold;
    lp.rows.push_back(std::move(floor));
    return lp;
}

LpProblem build_confirmation_lp(const MarketSnapshot& market, RiskLevel level, double cost_cap,
                                double upper_bound) {
    LpProblem lp = skeleton(market, cost_cap, upper_bound);
    const auto w = market.scenarios().weights();
    const std::size_t ni = market.leg_count();
    const auto means = leg_means(market);
    for (std::size_t i = 0; i < ni; ++i) lp.objective[1 + i] = -means[i];
    LpRow es;
    es.index.push_back(0);
    es.coef.push_back(1.0);
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] == 0.0) continue;
        es.index.push_back(1 + ni + j);
        es.coef.push_back(w[j] / level.p());
    }
    es.upper = 0.0;
    lp.rows.push_back(std::move(es));
    return lp;
}

double arbitrage_epsilon(const MarketSnapshot& market) {
    return 1e-6 * std::max(std::abs(market.spot()), market.max_abs_payoff());
}

DetectionResult detect(const MarketSnapshot& market, RiskLevel level, const DetectionOptions& options) {
    const std::size_t ni = market.leg_count();
    DetectionResult out;
    out.level = level;
    out.epsilon = options.epsilon.value_or(arbitrage_epsilon(market));

    if (!(out.epsilon > 0.0) || !std::isfinite(out.epsilon)) throw std::invalid_argument("epsilon must be positive");
    out.portfolio = Portfolio::zeros(ni);

    // ES < -epsilon forces E[X] > epsilon, so one LP with that floor covers both tests.
    Confirmation conf;
    conf.threshold = out.epsilon;
    if (best_mean(market, options.cost_cap, options.upper_bound) < out.epsilon) {
        out.confirmation = conf;
        return out;
    }
    const auto sol = solve_lp(build_threshold_lp(market, level, out.epsilon, options.cost_cap, options.upper_bound));
    if (sol.status == LpStatus::unbounded) throw LpNumericalError("detection LP reported unbounded");
    if (sol.status != LpStatus::optimal) {
        out.confirmation = conf;
        return out;
    }
    if (sol.objective < -out.epsilon) {
        out.min_es = sol.objective;
        out.arbitrage = true;
        out.alpha_star = sol.values[0];
        out.portfolio = extract_portfolio(sol.values, ni, options.upper_bound);
        return out;
    }
    conf.min_es_at_threshold = sol.objective;
    if (sol.objective <= kConfirmTol * out.epsilon) {
        out.arbitrage = true;
        out.alpha_star = sol.values[0];
        out.portfolio = extract_portfolio(sol.values, ni, options.upper_bound);
        const auto best = solve_checked(build_confirmation_lp(market, level, options.cost_cap, options.upper_bound));
        conf.max_expected_payoff = std::max(out.epsilon, -best.objective);
    }
    out.confirmation = conf;
    return out;
}

std::string to_string(MinPOutcome outcome) {
    switch (outcome) {
        case MinPOutcome::found: return "found";
        case MinPOutcome::none_in_bracket: return "none in bracket";
        case MinPOutcome::at_or_below_bracket: return "at or below bracket";
    }
    return "unknown";
}

MinPResult min_p(const MarketSnapshot& market, double p_lo, double p_hi, double tol,
                 const DetectionOptions& options) {
    if (!(p_lo > 0.0 && p_lo < p_hi && p_hi < 1.0)) {
        throw std::invalid_argument("invalid bracket");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("bisection tolerance must be positive");
    }
    MinPResult res;
    res.p_lo = p_lo;
    res.p_hi = p_hi;
    auto arbitrage = [&](double p) {
        ++res.evaluations;
        return detect(market, RiskLevel(p), options).arbitrage;
    };
    if (arbitrage(p_lo)) {
        res.outcome = MinPOutcome::at_or_below_bracket;
        res.p_star = p_lo;
        return res;
    }
    if (!arbitrage(p_hi)) {
        res.outcome = MinPOutcome::none_in_bracket;
        return res;
    }
    double lo = p_lo;
    double hi = p_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (arbitrage(mid)) hi = mid;
        else lo = mid;
    }
    res.outcome = MinPOutcome::found;
    res.p_star = hi;
    return res;
}

}  // namespace esarb
