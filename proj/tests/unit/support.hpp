#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "esarb/scenario_market.hpp"

namespace esarb::fixtures {

/// Weights summing to one to within a few ulps, normalized in long double.
inline std::vector<double> normalized(const std::vector<double>& raw) {
    long double total = 0.0L;
    for (double w : raw) total += w;
    std::vector<double> out(raw.size());
    long double acc = 0.0L;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = static_cast<double>(raw[i] / total);
        acc += out[i];
    }
    out.back() += static_cast<double>(1.0L - acc);
    return out;
}

inline std::vector<double> uniform_weights(std::size_t n) {
    return normalized(std::vector<double>(n, 1.0));
}

/// Random sample with non-uniform weights; values drawn from a normal
/// distribution, optionally rounded to create ties.
inline WeightedSample random_sample(std::mt19937_64& rng, std::size_t n, bool ties = false) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    WeightedSample s;
    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = normal(rng);
        if (ties) v = std::round(v * 2.0) / 2.0;
        s.values.push_back(v);
        raw[i] = unif(rng);
    }
    s.weights = normalized(raw);
    return s;
}

}  // namespace esarb::fixtures
