#include "relayrisk/outage_engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "relayrisk/errors.hpp"

namespace relayrisk {

OutageScenario make_scenario(const RelaySet& relays, std::size_t relay_index)
{
    const auto& relay = relays.relays.at(relay_index);
    return {relay_index, relay.substation, relay.type, relay.severe_set, relay.label()};
}

ScenarioOutcome evaluate_scenario(const Network& net, const PowerFlowSolution& base, const RelayInstance& relay,
                                  const OutageScenario& scenario, const SolverOptions& options,
                                  bool strand_home_substation)
{
    if (!relay.available)
        throw DomainError("relay " + relay.label() + " is not available");
    if (base.status != SolveStatus::Converged)
        throw InfeasibleBaseCase(to_string(base.status));

    ScenarioOutcome out;
    out.scenario = scenario;
    out.available = true;
    out.controlled_power_mw = relay.controlled_power_mw;
    out.severe_size = scenario.removed.size();

    auto outage = apply_outage(net, scenario.removed, options);
    auto& islands = outage.islands;
    if (!strand_home_substation) {
        // The relay's own bus, cut off by its own operation, is shed with
        // whatever it carries rather than left as a stranded island.
        std::erase(islands.stranded_buses, relay.substation);
        const bool slack_ok = !islands.slack_generation_lost || islands.promoted_slack != 0;
        islands.infeasible = !islands.stranded_buses.empty() || !slack_ok;
    }
    out.stranded_buses = islands.stranded_buses.size();
    if (islands.infeasible) {
        out.status = SolveStatus::IslandedInfeasible;
        return out;
    }
    // Flat start, independent of the base solution and of evaluation order.
    const auto sol = solve_power_flow(outage.network, options);
    out.status = sol.status;
    out.iterations = sol.iterations;
    out.max_mismatch = sol.max_mismatch;
    return out;
}

std::vector<ScenarioOutcome> enumerate_all(const Network& net, const RelaySet& relays,
                                           const PowerFlowSolution& base, const EnumerationOptions& options)
{
    if (base.status != SolveStatus::Converged)
        throw InfeasibleBaseCase(to_string(base.status));

    const std::size_t total = relays.total();
    std::vector<ScenarioOutcome> outcomes(total);
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex progress_mutex;
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total)
                return;
            try {
                const auto& relay = relays.relays[i];
                auto scenario = make_scenario(relays, i);
                if (relay.available) {
                    outcomes[i] = evaluate_scenario(net, base, relay, scenario, options.solver,
                                                    options.strand_home_substation);
                } else {
                    ScenarioOutcome sentinel;
                    sentinel.scenario = std::move(scenario);
                    sentinel.available = false;
                    sentinel.controlled_power_mw = relay.controlled_power_mw;
                    sentinel.severe_size = relay.severe_set.size();
                    outcomes[i] = std::move(sentinel);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(total);
                return;
            }
            if (options.progress) {
                std::lock_guard lock(progress_mutex);
                options.progress(++done, total);
            }
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(total)));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);
    return outcomes;
}

}  // namespace relayrisk
