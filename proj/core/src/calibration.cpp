#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "esarb/normal.hpp"
#include "esarb/random.hpp"
#include "esarb/scenario_models.hpp"
#include "nelder_mead.hpp"

namespace esarb {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct OptionMid {
    bool call;
    double strike;
    double mid;
};

double black_call(double forward, double strike, double total_sd) {
    const double d1 = (std::log(forward / strike) + 0.5 * total_sd * total_sd) / total_sd;
    return forward * normal_cdf(d1) - strike * normal_cdf(d1 - total_sd);
}

/// Total standard deviation matching an undiscounted call value, by bisection.
double implied_total_sd(double forward, double strike, double undiscounted_call) {
    double lo = 1e-4;
    double hi = 5.0;
    if (!(undiscounted_call > black_call(forward, strike, lo))) return lo;
    if (!(undiscounted_call < black_call(forward, strike, hi))) return hi;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (black_call(forward, strike, mid) < undiscounted_call) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// theta = (logit lambda1, logit xi, log s1, log s2), xi the share of the
/// forward carried by component 1.
LognormalMixture decode(const std::vector<double>& theta, double spot, double rate, double maturity) {
    LognormalMixture m;
    m.spot = spot;
    m.rate = rate;
    m.maturity = maturity;
    const double forward = spot * std::exp(rate * maturity);
    const double l1 = std::clamp(logistic(theta[0]), 1e-9, 1.0 - 1e-9);
    const double xi = std::clamp(logistic(theta[1]), 1e-12, 1.0 - 1e-12);
    m.weights = {l1, 1.0 - l1};
    m.log_sds = {std::exp(theta[2]), std::exp(theta[3])};
    const double m1 = xi * forward / l1;
    const double m2 = (1.0 - xi) * forward / (1.0 - l1);
    m.log_means = {std::log(m1) - 0.5 * m.log_sds[0] * m.log_sds[0],
                   std::log(m2) - 0.5 * m.log_sds[1] * m.log_sds[1]};
    return m;
}

std::vector<double> mixture_parameters(const LognormalMixture& m) {
    return {m.weights[0], m.log_means[0], m.log_means[1], m.log_sds[0], m.log_sds[1]};
}

}  // namespace

MixtureFit calibrate_mixture(const std::vector<InstrumentQuote>& quotes, double spot, double rate,
                             double maturity, const CalibrationOptions& options) {
    if (!(spot > 0.0) || !std::isfinite(rate) || !(maturity > 0.0)) {
        throw std::invalid_argument("bad market data");
    }
    if (options.starts == 0) throw std::invalid_argument("need at least one start");
    std::vector<OptionMid> mids;
    for (const auto& q : quotes) {
        q.validate();
        if (q.kind != InstrumentKind::call && q.kind != InstrumentKind::put) continue;
        if (!(q.bid > 0.0) || !std::isfinite(q.ask)) continue;
        mids.push_back({q.kind == InstrumentKind::call, *q.strike, 0.5 * (q.bid + q.ask)});
    }
    if (mids.size() < 5) throw std::invalid_argument("too few quotes");

    const double df = std::exp(-rate * maturity);
    const double forward = spot / df;

    // At-the-money total volatility seeds the scale of both components.
    const auto atm = std::min_element(mids.begin(), mids.end(), [&](const OptionMid& a, const OptionMid& b) {
        return std::abs(a.strike - forward) < std::abs(b.strike - forward);
    });
    const double atm_call = atm->call ? atm->mid / df : atm->mid / df + forward - atm->strike;
    const double base_sd = implied_total_sd(forward, atm->strike, atm_call);

    auto objective = [&](const std::vector<double>& theta) {
        const LognormalMixture m = decode(theta, spot, rate, maturity);
        double sse = 0.0;
        for (const auto& o : mids) {
            const double model = df * (o.call ? m.call(o.strike) : m.put(o.strike));
            const double e = (model - o.mid) / spot;
            sse += e * e;
        }
        return sse / static_cast<double>(mids.size());
    };

    detail::NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations;
    nm.x_tol = 1e-10;
    nm.f_tol = 1e-14;
    nm.initial_step = 0.3;
    nm.restarts = 4;

    const RandomStreams streams(options.seed);
    detail::NelderMeadResult best;
    best.f = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    for (std::size_t s = 0; s < options.starts; ++s) {
        Rng rng = streams.stream("calibrate-mixture", s);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double lambda = 0.2 + 0.6 * unif(rng);
        const double narrow = base_sd * (0.4 + 0.5 * unif(rng));
        const double wide = base_sd * (1.1 + 1.4 * unif(rng));
        const double xi = std::clamp(lambda * (0.9 + 0.2 * unif(rng)), 0.05, 0.95);
        std::vector<double> x0{logit(lambda), logit(xi), std::log(narrow), std::log(wide)};
        auto run = detail::nelder_mead(objective, x0, nm);
        evaluations += run.evaluations;
        if (run.f < best.f) best = std::move(run);
    }

    LognormalMixture model = decode(best.x, spot, rate, maturity);
    if (model.log_sds[0] > model.log_sds[1]) {
        std::swap(model.weights[0], model.weights[1]);
        std::swap(model.log_means[0], model.log_means[1]);
        std::swap(model.log_sds[0], model.log_sds[1]);
    }
    const double rmse = spot * std::sqrt(best.f);
    if (!std::isfinite(best.f)) {
        throw CalibrationError("calibration failed: no finite objective", mixture_parameters(model), best.f);
    }
    if (!best.converged) {
        throw CalibrationError("calibration did not converge", mixture_parameters(model), rmse);
    }
    MixtureFit fit;
    fit.model = model;
    fit.rmse = rmse;
    fit.evaluations = evaluations;
    fit.objective_trace = std::move(best.trace);
    return fit;
}

double garch_log_likelihood(const std::vector<double>& returns, double omega, double arch, double garch_coef) {
    const std::size_t n = returns.size();
    if (n < 2) throw std::invalid_argument("too few observations");
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(n);
    double var0 = 0.0;
    for (double r : returns) var0 += (r - mean) * (r - mean);
    var0 /= static_cast<double>(n);

    constexpr double kLog2Pi = 1.8378770664093453;
    double ll = 0.0;
    double var = var0;
    double prev_eps = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) var = omega + arch * prev_eps * prev_eps + garch_coef * var;
        if (!(var > 0.0)) return -std::numeric_limits<double>::infinity();
        const double eps = returns[t] - mean;
        ll -= 0.5 * (kLog2Pi + std::log(var) + eps * eps / var);
        prev_eps = eps;
    }
    return ll;
}

GarchFit fit_garch(const std::vector<double>& returns, int steps_ahead, std::uint64_t seed) {
    if (returns.size() < 250) throw std::invalid_argument("too few observations");
    if (steps_ahead < 1) throw std::invalid_argument("steps must be positive");
    for (double r : returns) {
        if (!std::isfinite(r)) throw std::invalid_argument("non-finite return");
    }
    const std::size_t n = returns.size();
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(n);
    double var0 = 0.0;
    for (double r : returns) var0 += (r - mean) * (r - mean);
    var0 /= static_cast<double>(n);
    if (!(var0 > 0.0)) throw std::invalid_argument("constant return series");

    // Search runs on (omega / var0, arch, garch) and every trial point is
    // projected onto omega > 0, arch, garch >= 0, arch + garch <= 1 - 1e-6.
    auto project = [var0](const std::vector<double>& t) {
        const double cap = 1.0 - 1e-6;
        double a = std::max(t[1], 0.0);
        double b = std::max(t[2], 0.0);
        if (a + b > cap) {
            const double shrink = cap / (a + b);
            a *= shrink;
            b *= shrink;
        }
        return std::array<double, 3>{std::max(t[0], 1e-8) * var0, a, b};
    };
    auto objective = [&](const std::vector<double>& t) {
        const auto [w, a, b] = project(t);
        return -garch_log_likelihood(returns, w, a, b);
    };

    detail::NelderMeadOptions nm;
    nm.max_evaluations = 6000;
    nm.x_tol = 1e-10;
    nm.f_tol = 1e-14;
    nm.initial_step = 0.1;
    nm.restarts = 8;

    // Start 0 is the best point of a coarse scan with omega tied to the sample
    // variance; the flat ridge at arch = 0 traps simplex runs started far off.
    std::vector<double> scan_start{1.0, 0.0, 0.0};
    double scan_best = objective(scan_start);
    for (double p : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995}) {
        for (double a : {0.002, 0.005, 0.01, 0.02, 0.04, 0.07, 0.1, 0.15, 0.2, 0.3}) {
            if (a > p) continue;
            std::vector<double> x{1.0 - p, a, p - a};
            const double v = objective(x);
            if (v < scan_best) {
                scan_best = v;
                scan_start = std::move(x);
            }
        }
    }
    const double persistence[] = {0.0, 0.5, 0.8, 0.95, 0.99};
    const RandomStreams streams(seed);
    GarchFit fit;
    detail::NelderMeadResult best;
    best.f = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < std::size(persistence); ++s) {
        Rng rng = streams.stream("fit-garch", s);
        std::uniform_real_distribution<double> unif(0.05, 0.5);
        const double p = persistence[s];
        const double share = unif(rng);
        std::vector<double> x0 = s == 0 ? scan_start : std::vector<double>{1.0 - p, share * p, (1.0 - share) * p};
        fit.start_log_likelihoods.push_back(-objective(x0));
        auto run = detail::nelder_mead(objective, x0, nm);
        if (run.f < best.f) best = std::move(run);
    }
    if (!std::isfinite(best.f)) {
        throw CalibrationError("garch fit failed: likelihood not finite at any start", {}, best.f);
    }
    const auto [w, a, b] = project(best.x);

    // One-step-ahead variance from the filtered path.
    double var = var0;
    for (std::size_t t = 1; t < n; ++t) {
        const double eps = returns[t - 1] - mean;
        var = w + a * eps * eps + b * var;
    }
    const double last = returns.back() - mean;
    fit.model.omega = w;
    fit.model.arch = a;
    fit.model.garch_coef = b;
    fit.model.steps = steps_ahead;
    fit.model.init_var = w + a * last * last + b * var;
    fit.model.drift = mean;
    fit.log_likelihood = -best.f;
    return fit;
}

}  // namespace esarb
