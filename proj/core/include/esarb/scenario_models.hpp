#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "esarb/scenario_market.hpp"

namespace esarb {

/// Two-component lognormal mixture for the terminal underlying value.
struct LognormalMixture {
    std::array<double, 2> weights{0.5, 0.5};
    std::array<double, 2> log_means{0.0, 0.0};
    std::array<double, 2> log_sds{0.2, 0.2};
    double spot = 1.0;
    double rate = 0.0;
    double maturity = 1.0;

    /// Throws std::invalid_argument on bad weights or non-positive log_sds.
    void validate() const;
    [[nodiscard]] double mean() const;
    /// |mean - spot * exp(rate * maturity)|
    [[nodiscard]] double martingale_error() const;
    [[nodiscard]] double cdf(double s) const;
    [[nodiscard]] double quantile(double u) const;
    /// Undiscounted expectation of (S - strike)^+.
    [[nodiscard]] double call(double strike) const;
    /// Undiscounted expectation of (strike - S)^+.
    [[nodiscard]] double put(double strike) const;
};

struct PartialMoments {
    double mass = 0.0;
    double first = 0.0;
};

/// Probability mass and first moment of the mixture on [a, b]; b may be +inf.
[[nodiscard]] PartialMoments mixture_partial_moments(const LognormalMixture& model, double a, double b);

struct GarchModel {
    double omega = 1e-6;
    double arch = 0.05;
    double garch_coef = 0.9;
    int steps = 1;
    double init_var = 1e-4;
    double drift = 0.0;

    /// Throws std::invalid_argument unless omega > 0, arch, garch >= 0,
    /// arch + garch < 1, steps >= 1 and init_var > 0.
    void validate() const;
    [[nodiscard]] double unconditional_variance() const;
};

/// Weights exact for payoffs continuous and piecewise linear with kinks only
/// at interior grid points. Throws std::invalid_argument on a bad grid and
/// std::runtime_error if a weight turns negative.
[[nodiscard]] ScenarioSet pl_quadrature(const LognormalMixture& model, const std::vector<double>& points);

/// 0, the strikes, the 1e-5 and 1 - 1e-5 quantiles, interior quantiles up to
/// `size` points, and a top point clear of the largest strike.
[[nodiscard]] std::vector<double> pl_grid(const LognormalMixture& model, const std::vector<double>& strikes,
                                          std::size_t size = 200);

[[nodiscard]] ScenarioSet mc_quadrature(const LognormalMixture& model, std::size_t n, std::uint64_t seed);

/// Terminal values spot * exp(sum of `steps` simulated log returns).
[[nodiscard]] ScenarioSet mc_quadrature(const GarchModel& model, double spot, std::size_t n, std::uint64_t seed);

/// One path of n log returns started from init_var.
[[nodiscard]] std::vector<double> simulate_garch_returns(const GarchModel& model, std::size_t n,
                                                         std::uint64_t seed);

/// Raised when a fit fails; carries the best parameters seen.
class CalibrationError : public std::runtime_error {
public:
    CalibrationError(const std::string& what, std::vector<double> best, double best_objective)
        : std::runtime_error(what), best_parameters(std::move(best)), best_objective(best_objective) {}
    std::vector<double> best_parameters;
    double best_objective;
};

struct MixtureFit {
    LognormalMixture model;
    double rmse = 0.0;
    std::size_t evaluations = 0;
    /// Best objective after each optimizer iteration of the winning start.
    std::vector<double> objective_trace;
};

struct CalibrationOptions {
    std::size_t starts = 10;
    std::uint64_t seed = 0;
    std::size_t max_evaluations = 40000;
};

/// Least squares on mid prices with the martingale constraint built in.
[[nodiscard]] MixtureFit calibrate_mixture(const std::vector<InstrumentQuote>& quotes, double spot,
                                           double rate, double maturity,
                                           const CalibrationOptions& options = {});

/// Gaussian log-likelihood of demeaned returns, first variance = sample variance.
[[nodiscard]] double garch_log_likelihood(const std::vector<double>& returns, double omega, double arch,
                                          double garch_coef);

struct GarchFit {
    GarchModel model;
    double log_likelihood = 0.0;
    std::vector<double> start_log_likelihoods;
};

[[nodiscard]] GarchFit fit_garch(const std::vector<double>& returns, int steps_ahead, std::uint64_t seed = 0);

}  // namespace esarb
