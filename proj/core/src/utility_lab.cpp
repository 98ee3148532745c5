#include "esarb/utility_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "esarb/random.hpp"
#include "nelder_mead.hpp"
#include "numeric_util.hpp"

namespace esarb {

void UtilitySpec::validate() const {
    switch (kind) {
        case UtilityKind::limited_liability:
            return;
        case UtilityKind::s_shaped_power:
            if (!(c1 > 0.0) || !(c2 >= 0.0) || !(a2 > 0.0) || !(a2 < a1) || !(a1 <= 1.0) || !std::isfinite(c1) ||
                !std::isfinite(c2)) {
                throw std::invalid_argument("s_shaped_power needs C1 > 0, C2 >= 0, 0 < a2 < a1 <= 1");
            }
            return;
        case UtilityKind::risk_manager_power:
            if (!(eta > 1.0) || !std::isfinite(eta)) {
                throw std::invalid_argument("risk_manager_power needs eta > 1");
            }
            return;
    }
}

double UtilitySpec::operator()(double x) const {
    switch (kind) {
        case UtilityKind::limited_liability:
            return x > 0.0 ? x : 0.0;
        case UtilityKind::s_shaped_power:
            return x >= 0.0 ? c1 * std::pow(x, a1) : -c2 * std::pow(-x, a2);
        case UtilityKind::risk_manager_power:
            return x >= 0.0 ? 0.0 : -std::pow(-x, eta);
    }
    return 0.0;
}

std::string UtilitySpec::label() const {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    switch (kind) {
        case UtilityKind::limited_liability:
            return "limited_liability";
        case UtilityKind::s_shaped_power:
            return "s_shaped_power:" + num(c1) + ":" + num(c2) + ":" + num(a1) + ":" + num(a2);
        case UtilityKind::risk_manager_power:
            return "risk_manager_power:" + num(eta);
    }
    return "unknown";
}

UtilitySpec UtilitySpec::s_shaped(double c1, double c2, double a1, double a2) {
    UtilitySpec s;
    s.kind = UtilityKind::s_shaped_power;
    s.c1 = c1;
    s.c2 = c2;
    s.a1 = a1;
    s.a2 = a2;
    s.validate();
    return s;
}

UtilitySpec UtilitySpec::risk_manager(double eta) {
    UtilitySpec s;
    s.kind = UtilityKind::risk_manager_power;
    s.eta = eta;
    s.validate();
    return s;
}

UtilitySpec parse_utility_spec(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.empty()) throw std::invalid_argument("empty utility spec");

    std::vector<double> args;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(parts[i], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != parts[i].size() || parts[i].empty()) {
            throw std::invalid_argument("bad utility parameter: " + parts[i]);
        }
        args.push_back(v);
    }
    if (parts[0] == "limited_liability" && args.empty()) return UtilitySpec::limited_liability();
    if (parts[0] == "s_shaped_power" && args.size() == 4) {
        return UtilitySpec::s_shaped(args[0], args[1], args[2], args[3]);
    }
    if (parts[0] == "risk_manager_power" && args.size() == 1) return UtilitySpec::risk_manager(args[0]);
    throw std::invalid_argument("bad utility spec: " + text);
}

double expected_utility(const WeightedSample& sample, const UtilitySpec& spec) {
    spec.validate();
    if (sample.values.empty() || sample.values.size() != sample.weights.size()) {
        throw std::invalid_argument("bad sample");
    }
    std::vector<double> terms(sample.size());
    for (std::size_t j = 0; j < sample.size(); ++j) terms[j] = sample.weights[j] * spec(sample.values[j]);
    return detail::neumaier_sum(terms);
}

std::vector<ScanRow> scaling_scan(const MarketSnapshot& market, const Portfolio& base, const Portfolio& ray,
                                  const std::vector<double>& lambdas, const std::vector<UtilitySpec>& specs,
                                  RiskLevel level) {
    if (base.size() != market.leg_count() || ray.size() != market.leg_count()) {
        throw std::invalid_argument("portfolio size does not match the market");
    }
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] >= 0.0) || !std::isfinite(lambdas[i])) throw std::invalid_argument("lambda must be >= 0");
        if (i > 0 && lambdas[i] < lambdas[i - 1]) throw std::invalid_argument("lambdas must be ascending");
    }
    for (const auto& s : specs) s.validate();

    std::vector<ScanRow> rows;
    rows.reserve(lambdas.size() * specs.size());
    for (double lambda : lambdas) {
        const Portfolio position = base.combined(ray, lambda);
        const WeightedSample sample = payoff_distribution(market, position);
        const double p = price(market, position);
        const double es = es_p(sample, level);
        for (const auto& s : specs) rows.push_back({lambda, s.label(), expected_utility(sample, s), p, es});
    }
    return rows;
}

std::vector<ConstraintRow> classic_constraint_sup(const MarketSnapshot& market, const UtilitySpec& constraint,
                                                  double floor, const std::vector<double>& caps,
                                                  const ConstraintSearch& search) {
    constraint.validate();
    if (constraint.kind != UtilityKind::risk_manager_power) {
        throw std::invalid_argument("constraint utility must be risk_manager_power");
    }
    if (!std::isfinite(floor)) throw std::invalid_argument("floor must be finite");
    if (floor > 0.0) throw std::invalid_argument("floor excludes zero portfolio");
    for (std::size_t i = 0; i < caps.size(); ++i) {
        if (!(caps[i] > 0.0) || !std::isfinite(caps[i]) || (i > 0 && caps[i] < caps[i - 1])) {
            throw std::invalid_argument("caps must be positive and ascending");
        }
    }
    if (search.starts == 0) throw std::invalid_argument("need at least one start");

    const std::size_t n = market.leg_count();
    const std::size_t m = market.scenario_count();
    const auto weights = market.scenarios().weights();
    const auto legs = market.legs();
    const double price_tol = 1e-12 * std::max(1.0, market.max_abs_payoff());

    struct RayEval {
        double price = 0.0;
        double gain = 0.0;     // E(Y^+) per unit of the normalized direction
        double penalty = 0.0;  // E(u_R(Y)) per unit
    };
    std::vector<double> y(m);
    auto evaluate_ray = [&](const std::vector<double>& d) {
        RayEval r;
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (d[i] == 0.0) continue;
            r.price += d[i] * legs[i].price;
            for (std::size_t s = 0; s < m; ++s) y[s] += d[i] * legs[i].payoff[s];
        }
        for (std::size_t s = 0; s < m; ++s) {
            if (y[s] > 0.0) r.gain += weights[s] * y[s];
            else r.penalty += weights[s] * constraint(y[s]);
        }
        return r;
    };
    // Along t * d the gain is linear in t and the constraint scales as t^eta.
    auto admissible_scale = [&](const RayEval& r, double cap) {
        if (r.penalty >= 0.0) return cap;
        return std::min(cap, std::pow(floor / r.penalty, 1.0 / constraint.eta));
    };
    auto direction = [&](const std::vector<double>& z) {
        std::vector<double> d(n);
        double top = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = std::abs(z[i]);
            top = std::max(top, d[i]);
        }
        if (top > 0.0) {
            for (double& v : d) v /= top;
        }
        return d;
    };

    const RandomStreams streams(search.seed);
    std::vector<std::vector<double>> starts;
    for (std::size_t k = 0; k < search.starts; ++k) {
        Rng rng = streams.stream("constraint-start", k);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> z(n);
        for (auto& v : z) v = k == 0 ? 1.0 : unif(rng);
        starts.push_back(std::move(z));
    }

    detail::NelderMeadOptions nm;
    nm.max_evaluations = 400 * (n + 1);
    nm.x_tol = 1e-9;
    nm.f_tol = 1e-12;
    nm.initial_step = 0.25;

    std::vector<ConstraintRow> rows;
    for (double cap : caps) {
        auto objective = [&](const std::vector<double>& z) {
            const auto d = direction(z);
            const RayEval r = evaluate_ray(d);
            if (r.price > price_tol) return r.price;  // infeasible points rank behind every feasible one
            return -admissible_scale(r, cap) * r.gain;
        };
        ConstraintRow best;
        best.cap = cap;
        best.portfolio = Portfolio::zeros(n);
        double best_f = 0.0;
        for (const auto& z0 : starts) {
            const auto run = detail::nelder_mead(objective, z0, nm);
            if (run.f < best_f) {
                best_f = run.f;
                const auto d = direction(run.x);
                const RayEval r = evaluate_ray(d);
                const double t = admissible_scale(r, cap);
                std::vector<double> q(n);
                for (std::size_t i = 0; i < n; ++i) q[i] = t * d[i];
                best.portfolio = Portfolio(std::move(q));
                best.best_value = t * r.gain;
                best.constraint_value = std::pow(t, constraint.eta) * r.penalty;
                best.price = t * r.price;
            }
        }
        rows.push_back(std::move(best));
    }
    return rows;
}

}  // namespace esarb
