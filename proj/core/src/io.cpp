#include "esarb/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace esarb {

namespace {

using nlohmann::json;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_number(const std::string& text, double& out) {
    if (text.empty()) return false;
    if (text == "inf" || text == "+inf" || text == "Inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    try {
        std::size_t used = 0;
        out = std::stod(text, &used);
        return used == text.size();
    } catch (const std::exception&) {
        return false;
    }
}

double number_cell(const std::string& text, const std::string& where) {
    double v = 0.0;
    if (!parse_number(text, v)) throw InputError(where + ": bad number '" + text + "'");
    return v;
}

/// Rows of a CSV file with the given header; blank lines skipped.
std::vector<std::vector<std::string>> read_table(const std::string& path, const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    while (std::getline(in, line) && trim(line).empty()) {}
    if (split_csv_line(trim(line)) != header) {
        std::string expect;
        for (const auto& h : header) expect += (expect.empty() ? "" : ",") + h;
        throw InputError(path + ": expected header " + expect);
    }
    std::vector<std::vector<std::string>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(trim(line));
        if (cells.size() != header.size()) {
            throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                             " fields");
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

double get_number(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key) || !j.at(key).is_number()) throw InputError(path + ": missing number '" + key + "'");
    return j.at(key).get<double>();
}

std::vector<double> get_vector(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key) || !j.at(key).is_array()) throw InputError(path + ": missing array '" + key + "'");
    std::vector<double> v;
    for (const auto& x : j.at(key)) {
        if (!x.is_number()) throw InputError(path + ": non-numeric entry in '" + key + "'");
        v.push_back(x.get<double>());
    }
    return v;
}

template <class F>
auto rethrow_as_input(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw InputError(path + ": " + e.what());
    }
}

}  // namespace

std::vector<InstrumentQuote> read_chain_csv(const std::string& path) {
    const auto rows = read_table(path, {"kind", "strike", "bid", "ask"});
    std::vector<InstrumentQuote> quotes;
    for (const auto& r : rows) {
        InstrumentQuote q;
        q.kind = rethrow_as_input(path, [&] { return parse_instrument_kind(r[0]); });
        if (!r[1].empty()) q.strike = number_cell(r[1], path);
        q.bid = number_cell(r[2], path);
        q.ask = r[3].empty() ? std::numeric_limits<double>::infinity() : number_cell(r[3], path);
        rethrow_as_input(path, [&] {
            q.validate();
            return 0;
        });
        quotes.push_back(q);
    }
    if (quotes.empty()) throw InputError(path + ": no quotes");
    return quotes;
}

MarketInfo read_market_json(const std::string& path) {
    const json j = read_json(path);
    MarketInfo m{get_number(j, "spot", path), get_number(j, "rate", path), get_number(j, "maturity_years", path)};
    if (!(m.spot > 0.0) || !(m.maturity > 0.0)) throw InputError(path + ": spot and maturity must be positive");
    return m;
}

ScenarioSet read_scenario_csv(const std::string& path) {
    std::vector<double> points;
    std::vector<double> weights;
    for (const auto& r : read_table(path, {"point", "weight"})) {
        points.push_back(number_cell(r[0], path));
        weights.push_back(number_cell(r[1], path));
    }
    return rethrow_as_input(path, [&] { return ScenarioSet(std::move(points), std::move(weights)); });
}

CompleteMarketDensity read_density_csv(const std::string& path, double rate, double horizon) {
    std::vector<double> u;
    std::vector<double> q;
    for (const auto& r : read_table(path, {"u", "q"})) {
        u.push_back(number_cell(r[0], path));
        q.push_back(number_cell(r[1], path));
    }
    return rethrow_as_input(path, [&] { return CompleteMarketDensity(std::move(u), std::move(q), rate, horizon); });
}

std::vector<double> read_returns_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<double> r;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        double v = 0.0;
        if (!parse_number(t, v) || !std::isfinite(v)) {
            if (first) {
                first = false;
                continue;
            }
            throw InputError(path + ":" + std::to_string(lineno) + ": bad return '" + t + "'");
        }
        first = false;
        r.push_back(v);
    }
    return r;
}

MarkowitzMarket read_markowitz_json(const std::string& path) {
    const json j = read_json(path);
    MarkowitzMarket m;
    m.mu = get_vector(j, "mu", path);
    m.c = get_vector(j, "c", path);
    m.rf = get_number(j, "rf", path);
    if (!j.contains("sigma") || !j.at("sigma").is_array()) throw InputError(path + ": missing array 'sigma'");
    for (const auto& row : j.at("sigma")) {
        if (!row.is_array()) throw InputError(path + ": sigma must be a matrix");
        std::vector<double> r;
        for (const auto& x : row) {
            if (!x.is_number()) throw InputError(path + ": non-numeric sigma entry");
            r.push_back(x.get<double>());
        }
        m.sigma.push_back(std::move(r));
    }
    rethrow_as_input(path, [&] {
        m.validate();
        return 0;
    });
    return m;
}

ModelSpec read_model_json(const std::string& path) {
    const json j = read_json(path);
    std::string kind;
    if (j.contains("model") && j.at("model").is_string()) kind = j.at("model").get<std::string>();
    else if (j.contains("weights")) kind = "mixture";
    else if (j.contains("omega")) kind = "garch";

    if (kind == "mixture") {
        LognormalMixture m;
        const auto w = get_vector(j, "weights", path);
        const auto mu = get_vector(j, "log_means", path);
        const auto sd = get_vector(j, "log_sds", path);
        if (w.size() != 2 || mu.size() != 2 || sd.size() != 2) throw InputError(path + ": mixture needs two components");
        m.weights = {w[0], w[1]};
        m.log_means = {mu[0], mu[1]};
        m.log_sds = {sd[0], sd[1]};
        m.spot = get_number(j, "spot", path);
        m.rate = get_number(j, "rate", path);
        m.maturity = get_number(j, "maturity_years", path);
        rethrow_as_input(path, [&] {
            m.validate();
            return 0;
        });
        return m;
    }
    if (kind == "garch") {
        GarchModel g;
        g.omega = get_number(j, "omega", path);
        g.arch = get_number(j, "arch", path);
        g.garch_coef = get_number(j, "garch_coef", path);
        const double steps = get_number(j, "steps", path);
        if (steps != std::floor(steps) || steps < 1 || steps > 1e6) throw InputError(path + ": bad steps");
        g.steps = static_cast<int>(steps);
        g.init_var = get_number(j, "init_var", path);
        g.drift = j.contains("drift") ? get_number(j, "drift", path) : 0.0;
        rethrow_as_input(path, [&] {
            g.validate();
            return 0;
        });
        return g;
    }
    throw InputError(path + ": unknown model kind");
}

std::string to_json(const LognormalMixture& model) {
    json j;
    j["model"] = "mixture";
    j["weights"] = {model.weights[0], model.weights[1]};
    j["log_means"] = {model.log_means[0], model.log_means[1]};
    j["log_sds"] = {model.log_sds[0], model.log_sds[1]};
    j["spot"] = model.spot;
    j["rate"] = model.rate;
    j["maturity_years"] = model.maturity;
    return j.dump(2);
}

std::string to_json(const GarchModel& model) {
    json j;
    j["model"] = "garch";
    j["omega"] = model.omega;
    j["arch"] = model.arch;
    j["garch_coef"] = model.garch_coef;
    j["steps"] = model.steps;
    j["init_var"] = model.init_var;
    j["drift"] = model.drift;
    return j.dump(2);
}

std::string detection_to_json(const MarketSnapshot& market, const DetectionResult& result) {
    json j;
    j["schema"] = 1;
    j["p"] = result.level.p();
    j["min_es"] = result.min_es;
    j["arbitrage"] = result.arbitrage;
    j["epsilon"] = result.epsilon;
    json legs = json::array();
    const auto all = market.legs();
    for (std::size_t i = 0; i < result.portfolio.size(); ++i) {
        if (result.portfolio[i] != 0.0) legs.push_back({{"label", all[i].label}, {"qty", result.portfolio[i]}});
    }
    j["portfolio"] = std::move(legs);
    j["alpha_star"] = result.alpha_star;
    if (result.confirmation) {
        const auto& c = *result.confirmation;
        auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
        j["confirmation"] = {{"threshold", c.threshold},
                             {"min_es_at_threshold", opt(c.min_es_at_threshold)},
                             {"max_expected_payoff", opt(c.max_expected_payoff)}};
    }
    else j["confirmation"] = nullptr;
    return j.dump(2) + "\n";
}

StoredDetection read_detection_json(const std::string& path) {
    const json j = read_json(path);
    StoredDetection d;
    if (!j.contains("arbitrage") || !j.at("arbitrage").is_boolean()) throw InputError(path + ": missing 'arbitrage'");
    d.arbitrage = j.at("arbitrage").get<bool>();
    d.p = get_number(j, "p", path);
    d.min_es = get_number(j, "min_es", path);
    if (!j.contains("portfolio") || !j.at("portfolio").is_array()) throw InputError(path + ": missing 'portfolio'");
    for (const auto& leg : j.at("portfolio")) {
        if (!leg.contains("label") || !leg.at("label").is_string()) throw InputError(path + ": leg without label");
        d.portfolio.push_back({leg.at("label").get<std::string>(), get_number(leg, "qty", path)});
    }
    return d;
}

Portfolio portfolio_from_labels(const MarketSnapshot& market, const std::vector<StoredLeg>& legs) {
    std::vector<double> q(market.leg_count(), 0.0);
    for (const auto& leg : legs) {
        const auto idx = market.find_leg(leg.label);
        if (!idx) throw InputError("unknown leg '" + leg.label + "'");
        if (!(leg.qty >= 0.0)) throw InputError("negative quantity for '" + leg.label + "'");
        q[*idx] += leg.qty;
    }
    return Portfolio(std::move(q));
}

std::string scan_to_csv(const std::vector<ScanRow>& rows) {
    std::string out = "lambda,spec,expected_utility,price,es_p\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,", r.lambda);
        out += buf;
        out += r.spec;
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", r.expected_utility, r.price, r.es_p);
        out += buf;
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw InputError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw InputError("cannot rename onto " + path + ": " + ec.message());
    }
}

}  // namespace esarb
