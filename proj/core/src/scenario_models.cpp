#include "esarb/scenario_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "esarb/normal.hpp"
#include "esarb/random.hpp"
#include "numeric_util.hpp"

namespace esarb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_or_minus_inf(double s) { return s > 0.0 ? std::log(s) : -kInf; }

}  // namespace

void LognormalMixture::validate() const {
    for (int i = 0; i < 2; ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(log_means[i]) || !(log_sds[i] > 0.0) ||
            !std::isfinite(log_sds[i])) {
            throw std::invalid_argument("bad mixture parameters");
        }
    }
    if (std::abs(weights[0] + weights[1] - 1.0) > 1e-12) {
        throw std::invalid_argument("mixture weights must sum to 1");
    }
    if (!(spot > 0.0) || !std::isfinite(rate) || !(maturity > 0.0)) {
        throw std::invalid_argument("bad mixture market data");
    }
}

double LognormalMixture::mean() const {
    double m = 0.0;
    for (int i = 0; i < 2; ++i) m += weights[i] * std::exp(log_means[i] + 0.5 * log_sds[i] * log_sds[i]);
    return m;
}

double LognormalMixture::martingale_error() const { return std::abs(mean() - spot * std::exp(rate * maturity)); }

double LognormalMixture::cdf(double s) const {
    if (s <= 0.0) return 0.0;
    double c = 0.0;
    for (int i = 0; i < 2; ++i) c += weights[i] * normal_cdf((std::log(s) - log_means[i]) / log_sds[i]);
    return c;
}

double LognormalMixture::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile level outside (0, 1)");
    // Bracket in log space with the component quantiles, then bisect.
    const double z = normal_quantile(u);
    double lo = std::min(log_means[0] + log_sds[0] * z, log_means[1] + log_sds[1] * z);
    double hi = std::max(log_means[0] + log_sds[0] * z, log_means[1] + log_sds[1] * z);
    lo -= 1e-9;
    hi += 1e-9;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(std::exp(mid)) < u) lo = mid;
        else hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

PartialMoments mixture_partial_moments(const LognormalMixture& model, double a, double b) {
    if (!(a >= 0.0) || !(b > a)) throw std::invalid_argument("bad integration range");
    PartialMoments pm;
    const double la = log_or_minus_inf(a);
    const double lb = b == kInf ? kInf : log_or_minus_inf(b);
    for (int i = 0; i < 2; ++i) {
        const double m = model.log_means[i];
        const double s = model.log_sds[i];
        const double da = (la - m) / s;
        const double db = (lb - m) / s;
        pm.mass += model.weights[i] * normal_mass(da, db);
        pm.first += model.weights[i] * std::exp(m + 0.5 * s * s) * normal_mass(da - s, db - s);
    }
    return pm;
}

double LognormalMixture::call(double strike) const {
    if (strike <= 0.0) return mean() - strike;
    const auto pm = mixture_partial_moments(*this, strike, kInf);
    return pm.first - strike * pm.mass;
}

double LognormalMixture::put(double strike) const {
    if (strike <= 0.0) return 0.0;
    const auto pm = mixture_partial_moments(*this, 0.0, strike);
    return strike * pm.mass - pm.first;
}

void GarchModel::validate() const {
    if (!(omega > 0.0) || !(arch >= 0.0) || !(garch_coef >= 0.0) || !(arch + garch_coef < 1.0) || steps < 1 ||
        !(init_var > 0.0) || !std::isfinite(drift)) {
        throw std::invalid_argument("bad garch parameters");
    }
}

double GarchModel::unconditional_variance() const { return omega / (1.0 - arch - garch_coef); }

ScenarioSet pl_quadrature(const LognormalMixture& model, const std::vector<double>& points) {
    model.validate();
    const std::size_t n = points.size();
    if (n < 3 || !(points.front() >= 0.0) || !std::isfinite(points.back())) {
        throw std::invalid_argument("bad quadrature grid");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(points[i] > points[i - 1])) throw std::invalid_argument("bad quadrature grid");
    }
    std::vector<double> w(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a = k == 0 ? 0.0 : points[k];
        const double b = k + 2 == n ? kInf : points[k + 1];
        const auto pm = mixture_partial_moments(model, a, b);
        const double gap = points[k + 1] - points[k];
        w[k] += (points[k + 1] * pm.mass - pm.first) / gap;
        w[k + 1] += (pm.first - points[k] * pm.mass) / gap;
    }
    for (double& x : w) {
        if (x < 0.0) {
            if (x > -1e-15) x = 0.0;
            else throw std::runtime_error("negative quadrature weight; extend the grid");
        }
    }
    const double total = detail::neumaier_sum(w);
    if (std::abs(total - 1.0) > 1e-10) {
        for (double& x : w) x /= total;
    }
    const double residual = 1.0 - detail::neumaier_sum(w);
    *std::max_element(w.begin(), w.end()) += residual;
    return ScenarioSet(points, std::move(w));
}

std::vector<double> pl_grid(const LognormalMixture& model, const std::vector<double>& strikes, std::size_t size) {
    model.validate();
    std::vector<double> pts{0.0};
    double top_strike = 0.0;
    for (double k : strikes) {
        if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("bad strike");
        pts.push_back(k);
        top_strike = std::max(top_strike, k);
    }
    const double q_lo = model.quantile(1e-5);
    const double q_hi = model.quantile(1.0 - 1e-5);
    pts.push_back(q_lo);
    pts.push_back(q_hi);
    if (top_strike >= q_hi) pts.push_back(1.5 * top_strike);

    auto dedup = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end(),
                            [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y)); }),
                v.end());
    };
    dedup(pts);
    if (pts.size() < size) {
        const std::size_t extra = size - pts.size();
        for (std::size_t i = 1; i <= extra; ++i) {
            const double u = 1e-5 + (1.0 - 2e-5) * static_cast<double>(i) / static_cast<double>(extra + 1);
            pts.push_back(model.quantile(u));
        }
        dedup(pts);
    }
    return pts;
}

ScenarioSet mc_quadrature(const LognormalMixture& model, std::size_t n, std::uint64_t seed) {
    model.validate();
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    Rng rng = RandomStreams(seed).stream("mixture");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> draws(n);
    for (auto& d : draws) {
        const int c = unif(rng) < model.weights[0] ? 0 : 1;
        d = std::exp(model.log_means[c] + model.log_sds[c] * normal(rng));
    }
    return ScenarioSet::from_draws(std::move(draws));
}

ScenarioSet mc_quadrature(const GarchModel& model, double spot, std::size_t n, std::uint64_t seed) {
    model.validate();
    if (!(spot > 0.0)) throw std::invalid_argument("spot must be positive");
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    Rng rng = RandomStreams(seed).stream("garch");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> draws(n);
    for (auto& d : draws) {
        double var = model.init_var;
        double total = 0.0;
        for (int t = 0; t < model.steps; ++t) {
            const double eps = std::sqrt(var) * normal(rng);
            total += model.drift + eps;
            var = model.omega + model.arch * eps * eps + model.garch_coef * var;
        }
        d = spot * std::exp(total);
    }
    return ScenarioSet::from_draws(std::move(draws));
}

std::vector<double> simulate_garch_returns(const GarchModel& model, std::size_t n, std::uint64_t seed) {
    model.validate();
    Rng rng = RandomStreams(seed).stream("garch-path");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> r(n);
    double var = model.init_var;
    for (auto& x : r) {
        const double eps = std::sqrt(var) * normal(rng);
        x = model.drift + eps;
        var = model.omega + model.arch * eps * eps + model.garch_coef * var;
    }
    return r;
}

}  // namespace esarb
