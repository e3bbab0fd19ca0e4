#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relayrisk/network.hpp"
#include "relayrisk/powerflow.hpp"
#include "relayrisk/relays.hpp"

namespace relayrisk {

struct OutageScenario {
    std::size_t relay_index = 0;  // position in RelaySet::relays
    int substation = 0;
    RelayType relay_type = RelayType::BusDifferential;
    std::vector<ComponentRef> removed;
    std::string label;  // "substation/type"
};

struct ScenarioOutcome {
    OutageScenario scenario;
    bool available = true;
    /// Unset for sentinel rows (relay not available).
    std::optional<SolveStatus> status;
    double controlled_power_mw = 0.0;
    std::size_t severe_size = 0;
    int iterations = 0;
    double max_mismatch = 0.0;
    std::size_t stranded_buses = 0;
};

OutageScenario make_scenario(const RelaySet& relays, std::size_t relay_index);

/// Applies one relay's severe-set outage to the base network and solves the
/// retained island from a flat start.
///
/// Unless `strand_home_substation` is set, the relay's own bus does not count
/// as stranded when the outage cuts it off; its load and generation are
/// simply lost. Other cut-off buses with load or generation make the
/// scenario IslandedInfeasible either way.
///
/// Throws DomainError for a relay that is not available.
ScenarioOutcome evaluate_scenario(const Network& net, const PowerFlowSolution& base,
                                  const RelayInstance& relay, const OutageScenario& scenario,
                                  const SolverOptions& options = {}, bool strand_home_substation = false);

using ProgressHook = std::function<void(std::size_t done, std::size_t total)>;

struct EnumerationOptions {
    SolverOptions solver;
    unsigned workers = 1;
    bool strand_home_substation = false;
    ProgressHook progress;  // called from worker threads, serialised internally
};

/// One outcome per relay in inventory order; unavailable relays come back as
/// sentinel rows without a solve. Throws InfeasibleBaseCase if `base` did not
/// converge.
std::vector<ScenarioOutcome> enumerate_all(const Network& net, const RelaySet& relays,
                                           const PowerFlowSolution& base,
                                           const EnumerationOptions& options = {});

}  // namespace relayrisk
