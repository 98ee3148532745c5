// esarb: command-line front end for expected-shortfall arbitrage checks.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "esarb/analytic_criteria.hpp"
#include "esarb/arbitrage_detector.hpp"
#include "esarb/io.hpp"
#include "esarb/lp.hpp"
#include "esarb/scenario_models.hpp"
#include "esarb/utility_lab.hpp"

namespace {

using nlohmann::json;
using namespace esarb;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitOptimizer = 2;
constexpr int kExitArbitrage = 3;

struct MarketArgs {
    std::string chain;
    std::string market;
    std::string model;
    std::string scenarios;
    std::string density;
    std::string quadrature = "mc";
    std::size_t n = 10000;
    std::size_t cells = 0;
    std::uint64_t seed = 0;
};

struct Common {
    MarketArgs market;
    double p = 0.05;
    double cost_cap = 0.0;
    std::string out;
};

void add_market_options(CLI::App* cmd, MarketArgs& a) {
    cmd->add_option("--chain", a.chain, "option chain CSV (kind,strike,bid,ask)")->check(CLI::ExistingFile);
    cmd->add_option("--market", a.market, "market JSON (spot, rate, maturity_years)")->check(CLI::ExistingFile);
    cmd->add_option("--model", a.model, "mixture or GARCH model JSON")->check(CLI::ExistingFile);
    cmd->add_option("--scenarios", a.scenarios, "scenario CSV (point,weight) instead of a model")
        ->check(CLI::ExistingFile);
    cmd->add_option("--density", a.density, "complete-market density CSV (u,q) instead of a chain")
        ->check(CLI::ExistingFile);
    cmd->add_option("--quadrature", a.quadrature, "mc or pl")->check(CLI::IsMember({"mc", "pl"}));
    cmd->add_option("--n", a.n, "quadrature size (draws or grid points)")->check(CLI::PositiveNumber);
    cmd->add_option("--cells", a.cells, "extra uniform cells for a density market");
    cmd->add_option("--seed", a.seed, "master seed");
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") std::cout << text;
    else write_file_atomic(out, text);
}

std::vector<double> chain_strikes(const std::vector<InstrumentQuote>& quotes) {
    std::vector<double> k;
    for (const auto& q : quotes) {
        if (q.strike) k.push_back(*q.strike);
    }
    return k;
}

MarketSnapshot build_market(const MarketArgs& a, std::uint64_t seed) {
    if (!a.density.empty()) {
        MarketInfo info;
        if (!a.market.empty()) info = read_market_json(a.market);
        const auto density = read_density_csv(a.density, info.rate, info.maturity);
        CompleteMarketGrid grid;
        grid.refine = a.cells;
        if (a.quadrature == "mc") {
            grid.weighting = CellWeighting::monte_carlo;
            grid.draws = a.n;
            grid.seed = seed;
        }
        return complete_market_snapshot(density, grid);
    }
    if (a.chain.empty() || a.market.empty()) {
        throw InputError("need --chain and --market, or --density");
    }
    const auto quotes = read_chain_csv(a.chain);
    const auto info = read_market_json(a.market);
    ScenarioSet scenarios;
    if (!a.scenarios.empty()) {
        scenarios = read_scenario_csv(a.scenarios);
    } else if (!a.model.empty()) {
        const ModelSpec model = read_model_json(a.model);
        if (const auto* mix = std::get_if<LognormalMixture>(&model)) {
            scenarios = a.quadrature == "pl" ? pl_quadrature(*mix, pl_grid(*mix, chain_strikes(quotes), a.n))
                                             : mc_quadrature(*mix, a.n, seed);
        } else {
            if (a.quadrature == "pl") throw InputError("pl quadrature needs a mixture model");
            scenarios = mc_quadrature(std::get<GarchModel>(model), info.spot, a.n, seed);
        }
    } else {
        throw InputError("need --model or --scenarios");
    }
    return make_market(quotes, std::move(scenarios), info.spot, info.rate, info.maturity);
}

json min_p_run(const MarketSnapshot& market, std::uint64_t seed, double lo, double hi, double tol,
               const DetectionOptions& opts, bool& arbitrage) {
    const MinPResult r = min_p(market, lo, hi, tol, opts);
    arbitrage = r.outcome != MinPOutcome::none_in_bracket;
    json j;
    j["seed"] = seed;
    j["outcome"] = to_string(r.outcome);
    j["p_star"] = r.p_star ? json(*r.p_star) : json(nullptr);
    j["p_lo"] = r.p_lo;
    j["p_hi"] = r.p_hi;
    j["evaluations"] = r.evaluations;
    return j;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw InputError("bad number list: " + text);
        v.push_back(x);
    }
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expected-shortfall arbitrage detection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "esarb 0.1.0");

    Common detect_args;
    auto* detect_cmd = app.add_subcommand("detect", "solve the detection LP at one level");
    add_market_options(detect_cmd, detect_args.market);
    detect_cmd->add_option("--p", detect_args.p, "ES level in (0, 1)")->check(CLI::Range(0.0, 1.0));
    detect_cmd->add_option("--cost-cap", detect_args.cost_cap, "price cap c (price <= c)");
    detect_cmd->add_option("--out", detect_args.out, "JSON output path (default stdout)");

    Common minp_args;
    std::string bracket = "0.0001,0.5";
    double tol = 1e-4;
    std::optional<std::uint64_t> second_seed;
    auto* minp_cmd = app.add_subcommand("min-p", "bisect for the smallest arbitrageable level");
    add_market_options(minp_cmd, minp_args.market);
    minp_cmd->add_option("--bracket", bracket, "lo,hi");
    minp_cmd->add_option("--tol", tol, "bisection tolerance")->check(CLI::PositiveNumber);
    minp_cmd->add_option("--second-seed", second_seed, "repeat an mc run with this seed");
    minp_cmd->add_option("--cost-cap", minp_args.cost_cap, "price cap c (price <= c)");
    minp_cmd->add_option("--out", minp_args.out, "JSON output path (default stdout)");

    std::string analytic_model;
    std::string analytic_density;
    double analytic_p = 0.05;
    std::string analytic_out;
    auto* analytic_cmd = app.add_subcommand("analytic", "closed-form criteria");
    analytic_cmd->require_subcommand(1);
    auto* mk_cmd = analytic_cmd->add_subcommand("markowitz", "Markowitz market criterion");
    mk_cmd->add_option("--model", analytic_model, "Markowitz JSON (mu, sigma, c, rf)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* cm_cmd = analytic_cmd->add_subcommand("complete", "complete-market criterion");
    cm_cmd->add_option("--density", analytic_density, "density CSV (u,q)")->required()->check(CLI::ExistingFile);
    for (auto* c : {mk_cmd, cm_cmd}) {
        c->add_option("--p", analytic_p, "ES level in (0, 1)")->check(CLI::Range(0.0, 1.0));
        c->add_option("--out", analytic_out, "JSON output path (default stdout)");
    }

    std::string cal_chain;
    std::string cal_market;
    std::string cal_returns;
    int cal_steps = 1;
    std::uint64_t cal_seed = 0;
    std::string cal_out;
    auto* cal_cmd = app.add_subcommand("calibrate", "fit a scenario model");
    cal_cmd->require_subcommand(1);
    auto* cal_mix = cal_cmd->add_subcommand("mixture", "two-component lognormal mixture from a chain");
    cal_mix->add_option("--chain", cal_chain, "option chain CSV")->required()->check(CLI::ExistingFile);
    cal_mix->add_option("--market", cal_market, "market JSON")->required()->check(CLI::ExistingFile);
    auto* cal_garch = cal_cmd->add_subcommand("garch", "GARCH(1,1) from log returns");
    cal_garch->add_option("--returns", cal_returns, "returns CSV")->required()->check(CLI::ExistingFile);
    cal_garch->add_option("--steps", cal_steps, "steps to the horizon")->check(CLI::PositiveNumber);
    for (auto* c : {cal_mix, cal_garch}) {
        c->add_option("--seed", cal_seed, "master seed");
        c->add_option("--out", cal_out, "model JSON output path (default stdout)");
    }

    Common scan_args;
    std::string scan_detection;
    std::string scan_lambdas = "1,10,100,1000,10000";
    std::vector<std::string> scan_specs{"limited_liability"};
    auto* scan_cmd = app.add_subcommand("utility-scan", "utilities along a stored arbitrage ray");
    add_market_options(scan_cmd, scan_args.market);
    scan_cmd->add_option("--detection", scan_detection, "detection JSON with arbitrage = true")
        ->required()
        ->check(CLI::ExistingFile);
    scan_cmd->add_option("--lambdas", scan_lambdas, "ascending scale factors");
    scan_cmd->add_option("--spec", scan_specs, "utility spec (repeatable)");
    scan_cmd->add_option("--p", scan_args.p, "level for the es_p column (default: stored level)");
    scan_cmd->add_option("--out", scan_args.out, "CSV output path (default stdout)");

    std::string sim_model;
    std::string sim_market;
    std::size_t sim_n = 10000;
    std::uint64_t sim_seed = 0;
    bool sim_returns = false;
    std::string sim_out;
    auto* sim_cmd = app.add_subcommand("simulate", "draw scenarios or a return path from a model");
    sim_cmd->add_option("--model", sim_model, "mixture or GARCH model JSON")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--market", sim_market, "market JSON (spot for GARCH terminal values)")
        ->check(CLI::ExistingFile);
    sim_cmd->add_option("--n", sim_n, "number of draws")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim_seed, "master seed");
    sim_cmd->add_flag("--returns", sim_returns, "write one simulated GARCH return path instead");
    sim_cmd->add_option("--out", sim_out, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (detect_cmd->parsed()) {
            const MarketSnapshot market = build_market(detect_args.market, detect_args.market.seed);
            DetectionOptions opts;
            opts.cost_cap = detect_args.cost_cap;
            const DetectionResult r = detect(market, RiskLevel(detect_args.p), opts);
            emit(detect_args.out, detection_to_json(market, r));
            return r.arbitrage ? kExitArbitrage : kExitOk;
        }

        if (minp_cmd->parsed()) {
            const auto b = parse_list(bracket);
            if (b.size() != 2) throw InputError("--bracket needs lo,hi");
            DetectionOptions opts;
            opts.cost_cap = minp_args.cost_cap;
            json report;
            report["schema"] = 1;
            report["quadrature"] = minp_args.market.quadrature;
            json runs = json::array();
            const MarketSnapshot market = build_market(minp_args.market, minp_args.market.seed);
            bool arbitrage = false;
            bool unused = false;
            runs.push_back(min_p_run(market, minp_args.market.seed, b[0], b[1], tol, opts, arbitrage));
            if (second_seed) {
                if (minp_args.market.quadrature != "mc") throw InputError("--second-seed needs mc quadrature");
                const MarketSnapshot again = build_market(minp_args.market, *second_seed);
                runs.push_back(min_p_run(again, *second_seed, b[0], b[1], tol, opts, unused));
                if (!runs[0]["p_star"].is_null() && !runs[1]["p_star"].is_null()) {
                    report["spread"] = std::abs(runs[0]["p_star"].get<double>() - runs[1]["p_star"].get<double>());
                } else {
                    report["spread"] = nullptr;
                }
            }
            const json first = runs[0];
            report["runs"] = std::move(runs);
            report["p_star"] = first["p_star"];
            report["outcome"] = first["outcome"];
            emit(minp_args.out, report.dump(2) + "\n");
            return arbitrage ? kExitArbitrage : kExitOk;
        }

        if (analytic_cmd->parsed()) {
            const RiskLevel level(analytic_p);
            json j;
            j["schema"] = 1;
            j["p"] = analytic_p;
            bool verdict = false;
            if (mk_cmd->parsed()) {
                const auto v = markowitz_arbitrage(read_markowitz_json(analytic_model), level);
                j["criterion"] = "markowitz";
                j["gradient"] = v.gradient;
                j["threshold"] = v.threshold;
                j["reason"] = to_string(v.reason);
                verdict = v.arbitrage;
                std::fprintf(stderr, "g = %.6f, E(p) = %.3f\n", v.gradient, v.threshold);
            } else {
                const auto d = read_density_csv(analytic_density);
                j["criterion"] = "complete";
                j["sup_q"] = d.sup();
                j["inverse_sup_q"] = 1.0 / d.sup();
                j["sup_attained"] = d.sup_attained();
                verdict = complete_market_arbitrage(d, level);
                std::fprintf(stderr, "1/sup q = %.6f\n", 1.0 / d.sup());
            }
            j["arbitrage"] = verdict;
            emit(analytic_out, j.dump(2) + "\n");
            return verdict ? kExitArbitrage : kExitOk;
        }

        if (cal_cmd->parsed()) {
            json report;
            if (cal_mix->parsed()) {
                const auto quotes = read_chain_csv(cal_chain);
                const auto info = read_market_json(cal_market);
                CalibrationOptions opts;
                opts.seed = cal_seed;
                const MixtureFit fit = calibrate_mixture(quotes, info.spot, info.rate, info.maturity, opts);
                report = json::parse(to_json(fit.model));
                report["rmse"] = fit.rmse;
                report["evaluations"] = fit.evaluations;
            } else {
                const GarchFit fit = fit_garch(read_returns_csv(cal_returns), cal_steps, cal_seed);
                report = json::parse(to_json(fit.model));
                report["log_likelihood"] = fit.log_likelihood;
            }
            emit(cal_out, report.dump(2) + "\n");
            return kExitOk;
        }

        if (scan_cmd->parsed()) {
            const StoredDetection stored = read_detection_json(scan_detection);
            if (!stored.arbitrage || stored.portfolio.empty()) {
                throw InputError(scan_detection + ": no arbitrage portfolio stored");
            }
            const MarketSnapshot market = build_market(scan_args.market, scan_args.market.seed);
            const Portfolio ray = portfolio_from_labels(market, stored.portfolio);
            std::vector<UtilitySpec> specs;
            for (const auto& s : scan_specs) specs.push_back(parse_utility_spec(s));
            const double level = scan_cmd->count("--p") > 0 ? scan_args.p : stored.p;
            const auto rows = scaling_scan(market, Portfolio::zeros(market.leg_count()), ray, parse_list(scan_lambdas),
                                           specs, RiskLevel(level));
            emit(scan_args.out, scan_to_csv(rows));
            return kExitOk;
        }

        if (sim_cmd->parsed()) {
            const ModelSpec model = read_model_json(sim_model);
            std::string csv;
            char buf[64];
            if (sim_returns) {
                const auto* g = std::get_if<GarchModel>(&model);
                if (!g) throw InputError("--returns needs a GARCH model");
                for (double r : simulate_garch_returns(*g, sim_n, sim_seed)) {
                    std::snprintf(buf, sizeof buf, "%.17g\n", r);
                    csv += buf;
                }
            } else {
                ScenarioSet s;
                if (const auto* mix = std::get_if<LognormalMixture>(&model)) {
                    s = mc_quadrature(*mix, sim_n, sim_seed);
                } else {
                    if (sim_market.empty()) throw InputError("GARCH simulation needs --market for the spot");
                    s = mc_quadrature(std::get<GarchModel>(model), read_market_json(sim_market).spot, sim_n, sim_seed);
                }
                csv = "point,weight\n";
                for (std::size_t i = 0; i < s.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.points()[i], s.weights()[i]);
                    csv += buf;
                }
            }
            emit(sim_out, csv);
            return kExitOk;
        }
    } catch (const CalibrationError& e) {
        std::fprintf(stderr, "esarb: %s (best objective %.6g)\n", e.what(), e.best_objective);
        return kExitOptimizer;
    } catch (const LpNumericalError& e) {
        std::fprintf(stderr, "esarb: %s\n", e.what());
        return kExitOptimizer;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "esarb: %s\n", e.what());
        return kExitInput;
    }
    return kExitInput;
}
