#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <json.hpp>

#include "esarb/analytic_criteria.hpp"
#include "esarb/arbitrage_detector.hpp"
#include "esarb/risk_measures.hpp"
#include "esarb/scenario_models.hpp"
#include "esarb/utility_lab.hpp"

using namespace esarb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

WeightedSample random_sample(std::mt19937_64& rng, std::size_t n, bool atoms) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    WeightedSample s;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = z(rng);
        if (atoms) v = std::round(4.0 * v) / 4.0;
        s.values.push_back(v);
        s.weights.push_back(u(rng));
        total += s.weights.back();
    }
    for (double& w : s.weights) w /= total;
    return s;
}

// ---------------------------------------------------------------------------

Outcome normal_es_values() {
    const double at_one_percent = normal_es(RiskLevel(0.01));
    const bool rounded = std::round(at_one_percent * 1000.0) == 2665.0;
    boost::math::normal_distribution<double> n01;
    boost::math::quadrature::tanh_sinh<double> quad;
    double worst = 0.0;
    for (double p : {0.001, 0.01, 0.05, 0.1, 0.25, 0.49}) {
        const double lower_tail = quad.integrate([&](double u) { return boost::math::quantile(n01, u); }, 0.0, p);
        worst = std::max(worst, std::abs(normal_es(RiskLevel(p)) + lower_tail / p));
    }
    return {rounded && worst < 1e-6, fmt("E(0.01) = %.6f, worst quadrature gap %.2e", at_one_percent, worst)};
}

/// Minimum of alpha + E[(L - alpha)^+] / p over the kinks alpha = L_j, L = -X.
double ru_minimum(const WeightedSample& s, double p) {
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.values[a] < s.values[b]; });
    // Walk the losses from the largest down, keeping mass and first moment above the kink.
    double mass = 0.0, first = 0.0, best = INFINITY;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double loss = -s.values[order[k]];
        best = std::min(best, loss + (first - loss * mass) / p);
        mass += s.weights[order[k]];
        first += s.weights[order[k]] * loss;
    }
    return best;
}

Outcome ru_identity() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> logn(std::log(3.0), std::log(1e4));
    std::uniform_real_distribution<double> level(0.001, 0.999);
    double worst_min = 0.0, worst_var = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<std::size_t>(std::round(std::exp(logn(rng))));
        const auto s = random_sample(rng, n, trial % 3 == 0);
        const RiskLevel p(level(rng));
        const double es = es_p(s, p);
        worst_min = std::max(worst_min, std::abs(ru_minimum(s, p.p()) - es));
        worst_var = std::max(worst_var, std::abs(ru_objective(s, p, var_p(s, p)) - es));
    }
    return {worst_min <= 1e-9 && worst_var <= 1e-9,
            fmt("worst |min F - ES| %.2e, worst |F(VaR) - ES| %.2e", worst_min, worst_var)};
}

Outcome coherence_suite() {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> size(2, 200);
    std::uniform_real_distribution<double> level(0.01, 0.99);
    std::normal_distribution<double> z(0.0, 1.0);
    std::size_t failures = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto x = random_sample(rng, size(rng), trial % 2 == 0);
        WeightedSample y = x;
        for (double& v : y.values) v = z(rng);
        const RiskLevel p(level(rng));
        const auto report = coherence_check([&](const WeightedSample& s) { return es_p(s, p); }, {x, y}, 1e-9);
        if (!report.all_passed()) ++failures;
        for (const auto& a : report.axioms) worst = std::max(worst, a.worst_violation);
    }
    return {failures == 0, fmt("%.0f failing pairs, worst violation %.2e", static_cast<double>(failures), worst)};
}

Outcome markowitz_agreement() {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::vector<double> levels{0.01, 0.025, 0.05, 0.1, 0.2};
    std::size_t agree = 0;
    double closest = INFINITY;
    for (int k = 0; k < 20; ++k) {
        const std::size_t assets = 1 + static_cast<std::size_t>(k % 2);
        const RiskLevel p(levels[static_cast<std::size_t>(k) % levels.size()]);
        const double e = normal_es(p);
        const double side = k % 4 < 2 ? 1.0 : -1.0;
        const double g = std::max(0.05, e + side * (0.25 + 0.75 * unif(rng)));

        MarkowitzMarket m;
        m.rf = 0.03 * unif(rng);
        m.c.assign(assets, 0.0);
        m.mu.assign(assets, 0.0);
        m.sigma.assign(assets, std::vector<double>(assets, 0.0));
        std::vector<std::vector<double>> a(assets, std::vector<double>(assets));
        for (auto& row : a) {
            for (double& v : row) v = 0.2 * (unif(rng) - 0.5);
        }
        for (std::size_t i = 0; i < assets; ++i) {
            m.c[i] = 0.5 + unif(rng);
            for (std::size_t j = 0; j < assets; ++j) {
                double cov = i == j ? 0.01 : 0.0;
                for (std::size_t l = 0; l < assets; ++l) cov += a[i][l] * a[j][l];
                m.sigma[i][j] = cov;
            }
        }
        std::vector<double> dir(assets);
        for (double& v : dir) v = 0.2 + unif(rng);
        for (std::size_t i = 0; i < assets; ++i) m.mu[i] = (1.0 + m.rf) * m.c[i] + dir[i];
        const double g0 = capital_line_gradient(m);
        for (std::size_t i = 0; i < assets; ++i) m.mu[i] = (1.0 + m.rf) * m.c[i] + dir[i] * g / g0;

        const auto verdict = markowitz_arbitrage(m, p);
        closest = std::min(closest, std::abs(verdict.gradient - e));
        const auto detected = detect(markowitz_scenario_market(m, 100000, 500 + static_cast<std::uint64_t>(k)), p);
        if (detected.arbitrage == verdict.arbitrage) ++agree;
        else std::printf("  mismatch: g %.4f E(p) %.4f p %.3f detector %d\n", verdict.gradient, e, p.p(),
                         detected.arbitrage);
    }
    return {agree == 20, fmt("%.0f/20 verdicts agree, smallest |g - E(p)| %.3f", static_cast<double>(agree), closest)};
}

Outcome complete_market_agreement() {
    struct Case {
        CompleteMarketDensity density;
        std::size_t refine;
    };
    std::vector<Case> cases{
        {CompleteMarketDensity::step({0.0, 0.4, 1.0}, {1.5, 2.0 / 3.0}, 0.0, 1.0), 0},
        {CompleteMarketDensity::step({0.0, 0.2, 0.5, 1.0}, {2.0, 1.2, 0.48}, 0.01, 1.0), 0},
        {CompleteMarketDensity({0.0, 0.25, 1.0}, {4.0, 1.0, 0.0}, 0.0, 1.0), 200},
        {CompleteMarketDensity::step({0.0, 0.05, 0.2, 1.0}, {10.0, 2.0, 0.25}, 0.0, 1.0), 0},
        {black_scholes_density({0.1, 0.2, 0.0, 1.0}, 50, 1e-8), 0},
    };
    std::size_t passed = 0;
    std::string detail;
    for (const auto& c : cases) {
        const auto market = complete_market_snapshot(c.density, {c.refine});
        const double spacing = c.refine > 0 ? 1.0 / static_cast<double>(c.refine) : c.density.max_spacing();
        const double target = 1.0 / c.density.sup();
        const auto res = min_p(market, 1e-3, 0.95, 1e-4);
        bool ok = res.outcome == MinPOutcome::found &&
                  std::abs(*res.p_star - target) <= std::max(2.0 * spacing, 1e-3);
        for (double shift : {-0.05, 0.05}) {
            const RiskLevel p(res.p_star.value_or(target) + shift);
            ok = ok && complete_market_arbitrage(c.density, p) == detect(market, p).arbitrage;
        }
        if (ok) ++passed;
        if (!detail.empty()) detail += "; ";
        detail += fmt("1/sup %.4f p* %.4f", target, res.p_star.value_or(NAN));
    }
    return {passed == cases.size(), detail};
}

LognormalMixture reference_mixture() {
    LognormalMixture m;
    m.spot = 100.0;
    m.rate = 0.02;
    m.maturity = 1.0;
    const double f = m.spot * std::exp(m.rate * m.maturity);
    m.weights = {0.6, 0.4};
    m.log_sds = {0.15, 0.35};
    m.log_means = {std::log(1.03 * f) - 0.5 * 0.15 * 0.15, std::log(0.955 * f) - 0.5 * 0.35 * 0.35};
    return m;
}

std::vector<double> strike_grid() {
    std::vector<double> k;
    for (double x = 60.0; x <= 150.0; x += 5.0) k.push_back(x);
    return k;
}

Outcome pl_exactness() {
    const auto model = reference_mixture();
    const auto strikes = strike_grid();
    const auto set = pl_quadrature(model, pl_grid(model, strikes, 400));
    std::mt19937_64 rng(6);
    std::normal_distribution<double> z(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        // Bond, underlying, then a call and a put per strike.
        std::vector<double> q(2 + 2 * strikes.size());
        for (double& v : q) v = z(rng);
        double exact = q[0] + q[1] * model.mean();
        double gross = std::abs(q[0]) + std::abs(q[1]) * model.mean();
        for (std::size_t i = 0; i < strikes.size(); ++i) {
            exact += q[2 + 2 * i] * model.call(strikes[i]) + q[3 + 2 * i] * model.put(strikes[i]);
            gross += std::abs(q[2 + 2 * i]) * model.call(strikes[i]) + std::abs(q[3 + 2 * i]) * model.put(strikes[i]);
        }
        double quad = 0.0;
        for (std::size_t j = 0; j < set.size(); ++j) {
            const double s = set.points()[j];
            double payoff = q[0] + q[1] * s;
            for (std::size_t i = 0; i < strikes.size(); ++i) {
                payoff += q[2 + 2 * i] * std::max(s - strikes[i], 0.0) + q[3 + 2 * i] * std::max(strikes[i] - s, 0.0);
            }
            quad += set.weights()[j] * payoff;
        }
        worst = std::max(worst, std::abs(quad - exact) / gross);
    }
    return {worst <= 1e-9, fmt("worst relative error %.2e over 50 portfolios", worst)};
}

Outcome calibration_round_trips() {
    const auto truth = reference_mixture();
    const double df = std::exp(-truth.rate * truth.maturity);
    std::vector<InstrumentQuote> chain;
    for (double k : strike_grid()) {
        for (auto kind : {InstrumentKind::call, InstrumentKind::put}) {
            const double v = df * (kind == InstrumentKind::call ? truth.call(k) : truth.put(k));
            if (v >= 0.05) chain.push_back({kind, k, v, v});
        }
    }
    const auto fit = calibrate_mixture(chain, truth.spot, truth.rate, truth.maturity);
    double worst = std::abs(fit.model.weights[0] - truth.weights[0]) / truth.weights[0];
    for (int i = 0; i < 2; ++i) {
        worst = std::max(worst, std::abs(fit.model.log_sds[i] - truth.log_sds[i]) / truth.log_sds[i]);
        worst = std::max(worst, std::abs(fit.model.log_means[i] - truth.log_means[i]) / std::abs(truth.log_means[i]));
    }

    GarchModel g;
    g.omega = 2e-6;
    g.arch = 0.1;
    g.garch_coef = 0.85;
    g.init_var = g.unconditional_variance();
    const auto garch = fit_garch(simulate_garch_returns(g, 5000, 9), 10);
    const double persistence = garch.model.arch + garch.model.garch_coef;
    return {worst <= 1e-3 && std::abs(persistence - 0.95) <= 0.05,
            fmt("mixture worst relative error %.2e, GARCH alpha + beta %.4f (true 0.95)", worst, persistence)};
}

/// Detected arbitrage portfolios from complete and Markowitz markets.
struct Ray {
    MarketSnapshot market;
    Portfolio portfolio;
    RiskLevel level;
};

std::vector<Ray> detected_rays(std::size_t count) {
    std::vector<Ray> out;
    std::mt19937_64 rng(88);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (out.size() < count) {
        if (out.size() % 2 == 0) {
            const double top = 1.5 + 3.0 * unif(rng);
            const double cut = 0.05 + 0.2 * unif(rng);
            const double rest = (1.0 - top * cut) / (1.0 - cut);
            if (!(rest > 0.0)) continue;
            auto market = complete_market_snapshot(CompleteMarketDensity::step({0.0, cut, 1.0}, {top, rest}, 0.0, 1.0),
                                                   {8});
            const RiskLevel p(std::min(0.95, 1.0 / top + 0.1));
            auto det = detect(market, p);
            if (det.arbitrage) out.push_back({std::move(market), det.portfolio, p});
        } else {
            MarkowitzMarket m;
            m.mu = {1.1 + 0.2 * unif(rng)};
            m.sigma = {{0.01}};
            m.c = {1.0};
            const RiskLevel p(0.05);
            auto market = markowitz_scenario_market(m, 2000, 40 + out.size());
            auto det = detect(market, p);
            if (det.arbitrage) out.push_back({std::move(market), det.portfolio, p});
        }
    }
    return out;
}

Outcome utility_scans() {
    const auto rays = detected_rays(10);
    const std::vector<double> lambdas{1e2, 1e3, 1e4};
    std::size_t passed = 0, risky = 0;
    double min_ratio = INFINITY;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unif(0.0, 0.5);
    for (const auto& r : rays) {
        std::vector<double> base(r.market.leg_count());
        for (double& v : base) v = unif(rng);
        const auto rows = scaling_scan(r.market, Portfolio(base), r.portfolio, lambdas,
                                       {UtilitySpec::limited_liability(), UtilitySpec::risk_manager(2.0)}, r.level);
        std::vector<double> tilde, rm;
        for (const auto& row : rows) (row.spec == "limited_liability" ? tilde : rm).push_back(row.expected_utility);
        bool ok = tilde[0] < tilde[1] && tilde[1] < tilde[2] && tilde[2] > 10.0 * tilde[0];
        min_ratio = std::min(min_ratio, tilde[2] / tilde[0]);
        const auto y = payoff_distribution(r.market, r.portfolio);
        const bool true_arbitrage = *std::min_element(y.values.begin(), y.values.end()) >= 0.0;
        if (!true_arbitrage) {
            ++risky;
            ok = ok && rm[0] > rm[1] && rm[1] > rm[2];
        }
        if (ok) ++passed;
    }
    return {passed == rays.size(), fmt("%.0f/10 rays pass (%.0f not true arbitrage), smallest growth %.1fx",
                                       static_cast<double>(passed), static_cast<double>(risky), min_ratio)};
}

MarketSnapshot fair_market(std::mt19937_64& rng, std::size_t scenarios, std::size_t assets) {
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> pts(scenarios), w(scenarios);
    double total = 0.0;
    for (std::size_t j = 0; j < scenarios; ++j) {
        pts[j] = static_cast<double>(j);
        w[j] = unif(rng);
        total += w[j];
    }
    for (double& v : w) v /= total;
    std::vector<TradableLeg> legs;
    for (std::size_t i = 0; i < assets; ++i) {
        std::vector<double> f(scenarios);
        double value = 0.0;
        for (std::size_t j = 0; j < scenarios; ++j) {
            f[j] = z(rng);
            value += w[j] * f[j];
        }
        std::vector<double> neg(f);
        for (double& v : neg) v = -v;
        legs.push_back({"asset " + std::to_string(i) + " long", value, f});
        legs.push_back({"asset " + std::to_string(i) + " short", -value, neg});
    }
    return MarketSnapshot(ScenarioSet(pts, w), std::move(legs), 1.0, 0.0, 1.0);
}

Outcome constraint_experiment() {
    std::mt19937_64 rng(19);
    const std::vector<double> caps{1e2, 1e3, 1e4};
    const auto rm = UtilitySpec::risk_manager(2.0);
    double worst_bounded = 0.0, worst_linear = INFINITY;
    for (int k = 0; k < 2; ++k) {
        const auto fair = fair_market(rng, 12, 2);
        const auto bounded = classic_constraint_sup(fair, rm, -1.0, caps);
        worst_bounded = std::max(worst_bounded, bounded[2].best_value / bounded[0].best_value - 1.0);

        std::vector<double> lottery(fair.scenario_count(), 0.0);
        for (std::size_t j = 0; j < 3; ++j) lottery[fair.scenario_count() - 1 - j - static_cast<std::size_t>(k)] = 1.0;
        const auto planted = fair.with_leg({"planted", 0.0, lottery});
        const auto linear = classic_constraint_sup(planted, rm, -1.0, caps);
        worst_linear = std::min({worst_linear, linear[1].best_value / linear[0].best_value,
                                 linear[2].best_value / linear[1].best_value});
    }
    return {worst_bounded < 0.01 && worst_linear >= 8.0,
            fmt("arbitrage-free growth %.2e over two decades, planted growth at least %.2fx per decade",
                worst_bounded, worst_linear)};
}

int run_cli(const std::string& args, const fs::path& dir) {
    const std::string cmd = std::string(ESARB_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() +
                            " 2> " + (dir / "err.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / ("esarb_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "d25.csv") << "u,q\n0,2.5\n0.2,2.5\n0.2,0.625\n1,0.625\n";
    const std::string args = "min-p --density " + (dir / "d25.csv").string() +
                             " --quadrature mc --n 10000000 --seed 1 --second-seed 2 --bracket 0.01,0.9 --tol 1e-5";
    const int a = run_cli(args + " --out " + (dir / "a.json").string(), dir);
    const int b = run_cli(args + " --out " + (dir / "b.json").string(), dir);
    const std::string ja = slurp(dir / "a.json");
    const bool identical = !ja.empty() && ja == slurp(dir / "b.json");
    double spread = NAN;
    try {
        const auto j = nlohmann::json::parse(ja);
        if (j["spread"].is_number()) spread = j["spread"].get<double>();
    } catch (const std::exception&) {
    }
    fs::remove_all(dir);
    return {a == 3 && b == 3 && identical && spread < 1e-3,
            fmt("exit codes %.0f/%.0f, two-seed spread %.2e", a, b, spread) +
                (identical ? ", byte-identical" : ", outputs differ")};
}

}  // namespace

int main() {
    struct Criterion {
        std::function<Outcome()> run;
        double budget_seconds;
    };
    const std::vector<Criterion> criteria{
        {normal_es_values, 1.0},         {ru_identity, 10.0},   {coherence_suite, 10.0},
        {markowitz_agreement, 120.0},    {complete_market_agreement, 120.0},
        {pl_exactness, 10.0},            {calibration_round_trips, 120.0},
        {utility_scans, 60.0},           {constraint_experiment, 120.0},
        {determinism, INFINITY},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= criteria[i].budget_seconds;
        std::printf("criterion %zu: %s (%s, %.2f s%s)\n", i + 1, o.pass && in_time ? "PASS" : "FAIL", o.detail.c_str(),
                    secs, in_time ? "" : ", over time budget");
        std::fflush(stdout);
        if (!o.pass || !in_time) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
