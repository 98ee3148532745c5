#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "esarb/analytic_criteria.hpp"
#include "esarb/arbitrage_detector.hpp"
#include "esarb/scenario_market.hpp"
#include "esarb/scenario_models.hpp"
#include "esarb/utility_lab.hpp"

namespace esarb {

/// Unreadable or malformed input file.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MarketInfo {
    double spot = 1.0;
    double rate = 0.0;
    double maturity = 1.0;
};

/// Header `kind,strike,bid,ask`; strike empty for bond and underlying, ask
/// may be empty or `inf` when there is no offer.
[[nodiscard]] std::vector<InstrumentQuote> read_chain_csv(const std::string& path);
/// `{"spot", "rate", "maturity_years"}`.
[[nodiscard]] MarketInfo read_market_json(const std::string& path);
/// Header `point,weight`.
[[nodiscard]] ScenarioSet read_scenario_csv(const std::string& path);
/// Header `u,q`; repeated u marks a jump.
[[nodiscard]] CompleteMarketDensity read_density_csv(const std::string& path, double rate = 0.0,
                                                     double horizon = 1.0);
/// One log return per line; a non-numeric first line is taken as a header.
[[nodiscard]] std::vector<double> read_returns_csv(const std::string& path);
/// `{"mu", "sigma", "c", "rf"}`.
[[nodiscard]] MarkowitzMarket read_markowitz_json(const std::string& path);

using ModelSpec = std::variant<LognormalMixture, GarchModel>;

/// Mixture or GARCH model; a `"model"` field picks the kind, otherwise the
/// keys do.
[[nodiscard]] ModelSpec read_model_json(const std::string& path);

[[nodiscard]] std::string to_json(const LognormalMixture& model);
[[nodiscard]] std::string to_json(const GarchModel& model);

/// Report with `"schema": 1`, portfolio legs by label, non-zero quantities only.
[[nodiscard]] std::string detection_to_json(const MarketSnapshot& market, const DetectionResult& result);

struct StoredLeg {
    std::string label;
    double qty = 0.0;
};

struct StoredDetection {
    double p = 0.0;
    bool arbitrage = false;
    double min_es = 0.0;
    std::vector<StoredLeg> portfolio;
};

[[nodiscard]] StoredDetection read_detection_json(const std::string& path);

/// Maps stored labels back onto the legs of `market`; throws InputError for an unknown label.
[[nodiscard]] Portfolio portfolio_from_labels(const MarketSnapshot& market, const std::vector<StoredLeg>& legs);

/// `lambda,spec,expected_utility,price,es_p`.
[[nodiscard]] std::string scan_to_csv(const std::vector<ScanRow>& rows);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace esarb
