#include "esarb/analytic_criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "esarb/normal.hpp"
#include "esarb/random.hpp"
#include "numeric_util.hpp"

namespace esarb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRankTol = 1e-10;

Eigen::MatrixXd covariance(const MarkowitzMarket& m) {
    const auto n = static_cast<Eigen::Index>(m.mu.size());
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) s(i, j) = m.sigma[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return s;
}

}  // namespace

double normal_es(RiskLevel level) {
    return normal_pdf(normal_quantile(level.p())) / level.p();
}

void MarkowitzMarket::validate() const {
    const std::size_t n = mu.size();
    if (n == 0) throw std::invalid_argument("Markowitz market needs at least one risky asset");
    if (c.size() != n || sigma.size() != n) throw std::invalid_argument("Markowitz dimensions disagree");
    for (const auto& row : sigma) {
        if (row.size() != n) throw std::invalid_argument("Markowitz dimensions disagree");
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(sigma[i][j]));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(sigma[i][j]) || std::abs(sigma[i][j] - sigma[j][i]) > kRankTol * std::max(scale, 1.0)) {
                throw std::invalid_argument("covariance must be finite and symmetric");
            }
        }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance(*this), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kRankTol * std::max(scale, 1.0)) {
        throw std::invalid_argument("covariance is not positive semidefinite");
    }
}

double capital_line_gradient(const MarkowitzMarket& market) {
    market.validate();
    const Eigen::MatrixXd s = covariance(market);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0) || eig.eigenvalues().minCoeff() <= kRankTol * top) {
        throw std::invalid_argument("degenerate risky assets");
    }
    Eigen::VectorXd m(static_cast<Eigen::Index>(market.mu.size()));
    for (std::size_t i = 0; i < market.mu.size(); ++i) {
        m[static_cast<Eigen::Index>(i)] = market.mu[i] - (1.0 + market.rf) * market.c[i];
    }
    const Eigen::VectorXd z = s.llt().solve(m);
    return std::sqrt(std::max(0.0, m.dot(z)));
}

std::string to_string(MarkowitzReason reason) {
    switch (reason) {
        case MarkowitzReason::gradient: return "gradient";
        case MarkowitzReason::negative_gross_rf: return "negative_gross_rf";
        case MarkowitzReason::none: return "none";
    }
    return "none";
}

MarkowitzVerdict markowitz_arbitrage(const MarkowitzMarket& market, RiskLevel level) {
    if (!(level.p() < 0.5)) {
        throw std::invalid_argument("theorem hypothesis violated");
    }
    MarkowitzVerdict v;
    v.threshold = normal_es(level);
    v.gradient = capital_line_gradient(market);
    if (1.0 + market.rf < 0.0) {
        v.arbitrage = true;
        v.reason = MarkowitzReason::negative_gross_rf;
    } else if (v.gradient >= v.threshold) {
        v.arbitrage = true;
        v.reason = MarkowitzReason::gradient;
    }
    return v;
}

MarketSnapshot markowitz_scenario_market(const MarkowitzMarket& market, std::size_t n, std::uint64_t seed) {
    market.validate();
    if (n == 0) throw std::invalid_argument("need at least one draw");
    const std::size_t k = market.mu.size();
    const Eigen::MatrixXd s = covariance(market);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    const Eigen::MatrixXd root =
        eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    Rng rng = RandomStreams(seed).stream("markowitz");
    std::normal_distribution<double> normal;
    std::vector<std::vector<double>> pay(k, std::vector<double>(n));
    Eigen::VectorXd z(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < k; ++i) z[static_cast<Eigen::Index>(i)] = normal(rng);
        const Eigen::VectorXd x = root * z;
        for (std::size_t i = 0; i < k; ++i) pay[i][j] = market.mu[i] + x[static_cast<Eigen::Index>(i)];
    }

    std::vector<double> points(n);
    for (std::size_t j = 0; j < n; ++j) points[j] = static_cast<double>(j);
    std::vector<double> weights(n, 1.0 / static_cast<double>(n));

    std::vector<TradableLeg> legs;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> neg(n);
        for (std::size_t j = 0; j < n; ++j) neg[j] = -pay[i][j];
        const std::string name = "asset " + std::to_string(i + 1);
        legs.push_back({name + " long", market.c[i], std::move(pay[i])});
        legs.push_back({name + " short", -market.c[i], std::move(neg)});
    }
    const double gross = 1.0 + market.rf;
    legs.push_back({"bond long", 1.0, std::vector<double>(n, gross)});
    legs.push_back({"bond short", -1.0, std::vector<double>(n, -gross)});
    return MarketSnapshot(ScenarioSet(std::move(points), std::move(weights)), std::move(legs), 1.0, 0.0, 1.0);
}

CompleteMarketDensity::CompleteMarketDensity(std::vector<double> u, std::vector<double> q, double rate,
                                             double horizon)
    : u_(std::move(u)), q_(std::move(q)), rate_(rate), horizon_(horizon) {
    if (u_.size() < 2 || u_.size() != q_.size()) {
        throw std::invalid_argument("density needs matching u and q tables with at least two nodes");
    }
    if (u_.front() != 0.0 || u_.back() != 1.0) {
        throw std::invalid_argument("density nodes must span [0, 1]");
    }
    if (!std::isfinite(rate_) || !(horizon_ >= 0.0)) {
        throw std::invalid_argument("density rate or horizon invalid");
    }
    for (std::size_t k = 0; k < u_.size(); ++k) {
        if (!std::isfinite(q_[k]) || q_[k] < 0.0) throw std::invalid_argument("density values must be finite and non-negative");
        if (k == 0) continue;
        if (u_[k] < u_[k - 1]) throw std::invalid_argument("density u must be non-decreasing");
        if (k >= 2 && u_[k] == u_[k - 1] && u_[k - 1] == u_[k - 2]) {
            throw std::invalid_argument("density has more than two nodes at one u");
        }
        if (q_[k] > q_[k - 1]) throw std::invalid_argument("density q must be non-increasing");
    }
    if (std::abs(integral(0.0, 1.0) - 1.0) > 1e-10) {
        throw std::invalid_argument("density must integrate to one");
    }
}

CompleteMarketDensity CompleteMarketDensity::step(const std::vector<double>& edges,
                                                  const std::vector<double>& values, double rate,
                                                  double horizon) {
    if (edges.size() != values.size() + 1 || values.empty()) {
        throw std::invalid_argument("step density needs one more edge than values");
    }
    std::vector<double> u;
    std::vector<double> q;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(edges[k + 1] > edges[k])) throw std::invalid_argument("step density edges must increase");
        u.push_back(edges[k]);
        q.push_back(values[k]);
        u.push_back(edges[k + 1]);
        q.push_back(values[k]);
    }
    return CompleteMarketDensity(std::move(u), std::move(q), rate, horizon);
}

bool CompleteMarketDensity::sup_attained() const noexcept {
    for (std::size_t k = 1; k < u_.size(); ++k) {
        if (q_[k] != q_.front()) return false;
        if (u_[k] > 0.0) return true;
    }
    return true;
}

double CompleteMarketDensity::value(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("u outside [0, 1]");
    if (u >= 1.0) return q_.back();
    // Last node at or before u, then interpolate toward the following one.
    auto it = std::upper_bound(u_.begin(), u_.end(), u);
    const auto k = static_cast<std::size_t>(std::distance(u_.begin(), it)) - 1;
    const double a = u_[k];
    const double b = u_[k + 1];
    if (b == a) return q_[k + 1];
    return q_[k] + (q_[k + 1] - q_[k]) * (u - a) / (b - a);
}

double CompleteMarketDensity::integral(double a, double b) const {
    if (!(a >= 0.0 && a <= b && b <= 1.0)) throw std::invalid_argument("integral bounds outside [0, 1]");
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < u_.size(); ++k) {
        const double lo = u_[k];
        const double hi = u_[k + 1];
        if (hi <= lo) continue;
        const double s = std::max(a, lo);
        const double t = std::min(b, hi);
        if (t <= s) continue;
        const double slope = (q_[k + 1] - q_[k]) / (hi - lo);
        const double qs = q_[k] + slope * (s - lo);
        const double qt = q_[k] + slope * (t - lo);
        total += 0.5 * (t - s) * (qs + qt);
    }
    return total;
}

double CompleteMarketDensity::max_spacing() const {
    double h = 0.0;
    for (std::size_t k = 0; k + 1 < u_.size(); ++k) h = std::max(h, u_[k + 1] - u_[k]);
    return h;
}

bool complete_market_arbitrage(const CompleteMarketDensity& density, RiskLevel level) {
    const double threshold = 1.0 / level.p();
    const double top = density.sup();
    if (std::abs(top - threshold) <= 1e-12 * threshold) return density.sup_attained();
    return top > threshold;
}

StepCandidateResult step_candidate(const CompleteMarketDensity& density, RiskLevel level, double alpha,
                                   double beta) {
    if (beta == alpha) throw std::invalid_argument("beta = alpha");
    if (!(alpha <= 0.0 && beta > 0.0)) throw std::invalid_argument("step candidate needs alpha <= 0 < beta");
    const double p = level.p();
    StepCandidateResult r;
    r.candidate = StepArbitrageCandidate{level, alpha, beta, beta * p / (beta - alpha)};
    const double pt = r.candidate.p_tilde;
    const double mass_ratio = pt > 0.0 ? density.integral(0.0, pt) * (p / pt) : p * density.sup();
    r.price = std::exp(-density.rate() * density.horizon()) * beta * (1.0 - mass_ratio);
    r.arbitrage = r.price <= 0.0;
    return r;
}

double step_payoff(const StepArbitrageCandidate& candidate, double u) {
    return u < candidate.p_tilde ? candidate.alpha : candidate.beta;
}

CompleteMarketDensity black_scholes_density(const BlackScholesParams& params, std::size_t cells, double u_min) {
    if (cells == 0 || !(params.vol > 0.0) || !(params.maturity > 0.0)) {
        throw std::invalid_argument("invalid Black-Scholes density parameters");
    }
    const double width = 1.0 / static_cast<double>(cells);
    if (!(u_min > 0.0)) u_min = width;
    const double shift = std::abs(params.drift - params.rate) / params.vol * std::sqrt(params.maturity);

    std::vector<double> edges{0.0};
    for (double u = std::min(u_min, width); u < width; u *= 2.0) edges.push_back(u);
    for (std::size_t k = 1; k <= cells; ++k) edges.push_back(k == cells ? 1.0 : static_cast<double>(k) * width);

    auto z = [](double u) {
        if (u <= 0.0) return -kInf;
        if (u >= 1.0) return kInf;
        return normal_quantile(u);
    };
    std::vector<double> values;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double mass = normal_mass(z(edges[k]) + shift, z(edges[k + 1]) + shift);
        double v = mass / (edges[k + 1] - edges[k]);
        if (!values.empty()) v = std::min(v, values.back());
        values.push_back(v);
    }
    // Rounding in the tail cells can leave the mass a hair off one.
    double total = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) total += values[k] * (edges[k + 1] - edges[k]);
    for (double& v : values) v /= total;
    return CompleteMarketDensity::step(edges, values, params.rate, params.maturity);
}

MarketSnapshot complete_market_snapshot(const CompleteMarketDensity& density, const CompleteMarketGrid& grid) {
    std::vector<double> edges(density.u());
    for (std::size_t k = 1; k < grid.refine; ++k) {
        edges.push_back(static_cast<double>(k) / static_cast<double>(grid.refine));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](double a, double b) { return std::abs(a - b) <= 1e-14; }),
                edges.end());
    const std::size_t cells = edges.size() - 1;

    std::vector<double> points(cells);
    std::vector<double> weights(cells);
    std::vector<double> qmass(cells);
    for (std::size_t j = 0; j < cells; ++j) {
        points[j] = 0.5 * (edges[j] + edges[j + 1]);
        weights[j] = edges[j + 1] - edges[j];
        qmass[j] = density.integral(edges[j], edges[j + 1]);
    }
    if (grid.weighting == CellWeighting::monte_carlo) {
        if (grid.draws == 0) throw std::invalid_argument("Monte Carlo cell weighting needs draws");
        Rng rng = RandomStreams(grid.seed).stream("complete-market");
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        std::vector<std::size_t> counts(cells, 0);
        for (std::size_t i = 0; i < grid.draws; ++i) {
            const double u = uniform(rng);
            auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, u);
            ++counts[static_cast<std::size_t>(std::distance(edges.begin() + 1, it))];
        }
        const double inv = 1.0 / static_cast<double>(grid.draws);
        for (std::size_t j = 0; j < cells; ++j) weights[j] = static_cast<double>(counts[j]) * inv;
    }
    const double total = detail::neumaier_sum(weights);
    for (double& w : weights) w /= total;

    const double df = std::exp(-density.rate() * density.horizon());
    std::vector<TradableLeg> legs;
    legs.reserve(2 * cells + 2);
    for (std::size_t j = 0; j < cells; ++j) {
        std::vector<double> pay(cells, 0.0);
        pay[j] = 1.0;
        std::vector<double> neg(cells, 0.0);
        neg[j] = -1.0;
        const std::string name = "cell " + std::to_string(j + 1);
        legs.push_back({name + " long", df * qmass[j], std::move(pay)});
        legs.push_back({name + " short", -df * qmass[j], std::move(neg)});
    }
    legs.push_back({"bond long", df, std::vector<double>(cells, 1.0)});
    legs.push_back({"bond short", -df, std::vector<double>(cells, -1.0)});
    return MarketSnapshot(ScenarioSet(std::move(points), std::move(weights)), std::move(legs), 1.0,
                          density.rate(), density.horizon());
}

}  // namespace esarb
