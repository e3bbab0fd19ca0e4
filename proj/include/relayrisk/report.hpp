#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "relayrisk/network.hpp"
#include "relayrisk/outage_engine.hpp"
#include "relayrisk/powerflow.hpp"
#include "relayrisk/relays.hpp"
#include "relayrisk/risk.hpp"
#include "relayrisk/system_totals.hpp"

namespace relayrisk {

struct AssessmentConfig {
    SolverOptions solver;
    TopologyOptions topology;
    RiskOptions risk;
    unsigned workers = 1;
    bool strand_home_substation = false;
    ProgressHook progress;
};

struct TypeShare {
    std::size_t count = 0;
    double percent = 0.0;
};

struct RiskReport {
    std::string case_name;
    std::vector<RiskRecord> rows;  // one per relay, inventory order
    std::vector<std::size_t> critical;  // row positions with R_avg == 1.0
    std::map<RelayType, TypeShare> critical_by_type;
    SigmaHistogram histogram;  // over available relays
    SystemTotals totals;
    std::size_t relay_count = 0;
    std::size_t available_count = 0;
};

/// Scores outcomes and assembles the report.
RiskReport build_report(std::string case_name, std::vector<ScenarioOutcome> outcomes,
                        const RiskOptions& options);

/// parse -> instantiate -> enumerate -> score -> report.
///
/// Throws InfeasibleBaseCase when the base case does not converge; other
/// module errors are rethrown with the case name prefixed.
RiskReport run_assessment(const Network& net, const AssessmentConfig& config);
RiskReport run_assessment(const std::filesystem::path& case_path, const AssessmentConfig& config);

struct RankedRow {
    std::size_t row = 0;  // position in RiskReport::rows
    bool critical = false;
};

struct Ranking {
    std::vector<RankedRow> order;  // critical rows first, then by descending R_avg
    std::map<RelayType, TypeShare> critical_by_type;
};

Ranking rank_critical(const RiskReport& report);

// Serialisation. Doubles are written in shortest round-trip form so CSV and
// JSON carry identical values.
std::string format_number(double value);
std::string report_csv(const RiskReport& report);
std::string report_json(const RiskReport& report);
std::string sigma_bins_csv(const SigmaHistogram& histogram);
std::string sigma_table_csv(const SigmaHistogram& histogram);
std::string ranking_csv(const RiskReport& report, const Ranking& ranking);

std::string inventory_json(const Network& net, const RelaySet& relays);
std::string counts_text(const ScenarioCounts& counts);

}  // namespace relayrisk
