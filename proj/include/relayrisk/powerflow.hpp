#pragma once

#include <span>
#include <string>
#include <vector>

#include "relayrisk/network.hpp"

namespace relayrisk {

enum class SolveStatus { Converged, Diverged, IslandedInfeasible };

const char* to_string(SolveStatus status);

/// Anything but Converged is scored with the diverged severity branch.
inline bool is_diverged(SolveStatus status) { return status != SolveStatus::Converged; }

struct SolverOptions {
    double tolerance = 1e-8;  // max |mismatch|, p.u.
    int max_iterations = 30;
    bool enforce_q_limits = false;
    /// When the slack generation is tripped, hand the reference role to the
    /// largest remaining generator in the slack island instead of failing.
    bool promote_slack = false;
};

struct BranchFlow {
    double p_from = 0.0;  // MW leaving the from-bus into the branch
    double q_from = 0.0;
    double p_to = 0.0;    // MW leaving the to-bus into the branch
    double q_to = 0.0;
};

struct PowerFlowSolution {
    SolveStatus status = SolveStatus::Diverged;
    int iterations = 0;
    double max_mismatch = 0.0;  // p.u., over P at PV/PQ and Q at PQ buses

    // Per bus, same order as Network::buses. De-energized buses have vm = 0.
    std::vector<double> vm;
    std::vector<double> va;  // rad
    std::vector<bool> energized;
    std::vector<double> injection_p;  // MW, net injection into the network
    std::vector<double> injection_q;

    std::vector<BranchFlow> branch_flows;  // same order as Network::branches
    std::vector<double> gen_p;             // MW, same order as Network::generators
    std::vector<double> gen_q;
};

/// Newton-Raphson AC power flow in polar form from a flat start.
///
/// Only the island holding the slack bus is solved; every other bus is
/// reported de-energized. A singular Jacobian or non-finite iterate yields
/// Diverged rather than an exception. Throws DomainError if the network has
/// no slack bus.
PowerFlowSolution solve_power_flow(const Network& net, const SolverOptions& options = {});

/// Largest active-power mismatch (MW) at any energized non-slack bus when the
/// injections implied by `sol` are recomputed from its voltages.
double recompute_mismatch_mw(const Network& net, const PowerFlowSolution& sol);

struct IslandReport {
    /// Connected bus groups (bus ids) over in-service branches.
    std::vector<std::vector<int>> islands;
    std::size_t slack_island = 0;
    /// Buses outside the slack island that still carry generation or load.
    std::vector<int> stranded_buses;
    bool slack_generation_lost = false;
    int promoted_slack = 0;  // new slack bus id when promotion happened, else 0
    bool infeasible = false;
};

struct OutageResult {
    Network network;
    IslandReport islands;
};

/// Switches out `removed` and classifies the resulting topology.
///
/// Throws DomainError if a reference is unknown, already out of service, or
/// listed twice.
OutageResult apply_outage(const Network& net, std::span<const ComponentRef> removed,
                          const SolverOptions& options = {});

/// Connected components of the in-service branch graph, as bus positions.
std::vector<std::vector<std::size_t>> connected_components(const Network& net);

}  // namespace relayrisk
