#pragma once

#include <vector>

#include "relayrisk/network.hpp"
#include "relayrisk/powerflow.hpp"

namespace relayrisk {

struct SystemTotals {
    double generation_mw = 0.0;  // solved, slack output included
    double load_mw = 0.0;
    double losses_mw = 0.0;      // series losses plus shunt conductance
    std::vector<double> injection_magnitude_mw;  // |P_inj| per bus
    int generator_count = 0;                      // in service
    int load_count = 0;                           // buses with a load component
    int transformer_count = 0;
};

/// Totals from the solved base case. Throws InfeasibleBaseCase when the
/// supplied or computed solution did not converge.
SystemTotals system_totals(const Network& net, const PowerFlowSolution& base);
SystemTotals system_totals(const Network& net, const SolverOptions& options = {});

}  // namespace relayrisk
