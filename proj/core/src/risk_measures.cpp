#include "esarb/risk_measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "numeric_util.hpp"

namespace esarb {

RiskLevel::RiskLevel(double p) : p_(p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("invalid level");
    }
}

namespace {

void validate(const WeightedSample& s) {
    if (s.values.empty()) {
        throw std::invalid_argument("empty sample");
    }
    if (s.values.size() != s.weights.size()) {
        throw std::invalid_argument("sample values and weights differ in length");
    }
    for (double w : s.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("sample weights must be non-negative");
        }
    }
    if (std::abs(detail::neumaier_sum(s.weights) - 1.0) > 1e-9) {
        throw std::invalid_argument("sample weights must sum to one");
    }
}

// Ascending by value, ties by original index.
std::vector<std::size_t> ascending_order(const WeightedSample& s) {
    std::vector<std::size_t> order(s.values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
    return order;
}

double hinge_sum(const WeightedSample& s, double alpha) {
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t j = 0; j < s.values.size(); ++j) {
        const double h = -s.values[j] - alpha;
        if (h <= 0.0) continue;
        const double x = s.weights[j] * h;
        const double t = sum + x;
        comp += (std::abs(sum) >= std::abs(x)) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

}  // namespace

double var_p(const WeightedSample& sample, RiskLevel level) {
    validate(sample);
    const auto order = ascending_order(sample);
    double cum = 0.0;
    for (std::size_t idx : order) {
        cum += sample.weights[idx];
        if (cum > level.p()) {
            return -sample.values[idx];
        }
    }
    // Rounding left the total at or below p: the top value is the quantile.
    return -sample.values[order.back()];
}

double es_p(const WeightedSample& sample, RiskLevel level) {
    validate(sample);
    const double p = level.p();
    const auto order = ascending_order(sample);
    double cum = 0.0;
    double acc = 0.0;
    double comp = 0.0;
    for (std::size_t idx : order) {
        if (!(cum < p)) break;
        const double take = std::min(sample.weights[idx], p - cum);
        const double x = -sample.values[idx] * take;
        const double t = acc + x;
        comp += (std::abs(acc) >= std::abs(x)) ? (acc - t) + x : (x - t) + acc;
        acc = t;
        cum += sample.weights[idx];
    }
    return (acc + comp) / p;
}

double ru_objective(const WeightedSample& sample, RiskLevel level, double alpha) {
    validate(sample);
    return alpha + hinge_sum(sample, alpha) / level.p();
}

bool CoherenceReport::all_passed() const {
    return std::all_of(axioms.begin(), axioms.end(), [](const AxiomResult& a) { return a.passed; });
}

const AxiomResult& CoherenceReport::axiom(const std::string& name) const {
    for (const auto& a : axioms) {
        if (a.name == name) return a;
    }
    throw std::out_of_range("unknown axiom: " + name);
}

namespace {

WeightedSample transform(const WeightedSample& s, double scale, double shift) {
    WeightedSample out{s.values, s.weights};
    for (double& v : out.values) v = scale * v + shift;
    return out;
}

WeightedSample add(const WeightedSample& a, const WeightedSample& b, bool abs_second) {
    WeightedSample out{a.values, a.weights};
    for (std::size_t j = 0; j < out.values.size(); ++j) {
        out.values[j] += abs_second ? std::abs(b.values[j]) : b.values[j];
    }
    return out;
}

void record(AxiomResult& r, double violation, double tolerance) {
    if (std::isnan(violation)) violation = INFINITY;
    r.worst_violation = std::max(r.worst_violation, violation);
    if (violation > tolerance) r.passed = false;
}

}  // namespace

CoherenceReport coherence_check(const RiskFunctional& measure,
                                const std::vector<WeightedSample>& samples,
                                double tolerance) {
    if (samples.empty()) {
        throw std::invalid_argument("coherence check needs at least one sample");
    }
    for (const auto& s : samples) {
        validate(s);
        if (s.weights != samples.front().weights) {
            throw std::invalid_argument("samples do not share a scenario grid");
        }
    }
    AxiomResult normalization{"normalization"};
    AxiomResult monotonicity{"monotonicity"};
    AxiomResult subadditivity{"subadditivity"};
    AxiomResult translation{"translation"};
    AxiomResult homogeneity{"homogeneity"};

    const auto& w = samples.front().weights;
    const WeightedSample zero{std::vector<double>(w.size(), 0.0), w};
    record(normalization, std::abs(measure(zero)), tolerance);

    std::vector<double> rho(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& x = samples[i];
        rho[i] = measure(x);
        for (double a : {-1.5, 0.7, 3.0}) {
            const double shifted = measure(transform(x, 1.0, a));
            record(translation, std::abs(shifted - (rho[i] - a)), tolerance);
        }
        for (double lambda : {0.5, 2.0, 10.0}) {
            const double scaled = measure(transform(x, lambda, 0.0));
            record(homogeneity, std::abs(scaled - lambda * rho[i]), tolerance);
        }
    }

    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const auto& x = samples[i];
            const auto& y = samples[j];
            record(subadditivity, measure(add(x, y, false)) - rho[i] - rho[j], tolerance);

            // X + |Y| dominates X pointwise, so it can never be riskier.
            record(monotonicity, measure(add(x, y, true)) - rho[i], tolerance);
            const bool x_le_y = std::equal(x.values.begin(), x.values.end(), y.values.begin(),
                                           [](double a, double b) { return a <= b; });
            const bool y_le_x = std::equal(y.values.begin(), y.values.end(), x.values.begin(),
                                           [](double a, double b) { return a <= b; });
            if (x_le_y) record(monotonicity, rho[j] - rho[i], tolerance);
            if (y_le_x) record(monotonicity, rho[i] - rho[j], tolerance);
        }
    }
    return CoherenceReport{{normalization, monotonicity, subadditivity, translation, homogeneity}};
}

}  // namespace esarb
