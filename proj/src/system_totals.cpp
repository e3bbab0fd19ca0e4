#include "relayrisk/system_totals.hpp"

#include <cmath>

#include "relayrisk/errors.hpp"

namespace relayrisk {

SystemTotals system_totals(const Network& net, const PowerFlowSolution& base)
{
    if (base.status != SolveStatus::Converged)
        throw InfeasibleBaseCase(to_string(base.status));

    SystemTotals t;
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        if (!net.generators[g].in_service)
            continue;
        t.generation_mw += base.gen_p[g];
        ++t.generator_count;
    }
    for (std::size_t b = 0; b < net.buses.size(); ++b) {
        const auto& bus = net.buses[b];
        if (!base.energized[b])
            continue;
        t.load_mw += bus.load_p;
        if (bus.has_load())
            ++t.load_count;
        t.losses_mw += bus.shunt_g * base.vm[b] * base.vm[b];
    }
    for (const auto& br : net.branches)
        if (br.in_service && br.is_transformer)
            ++t.transformer_count;
    for (const auto& flow : base.branch_flows)
        t.losses_mw += flow.p_from + flow.p_to;
    t.injection_magnitude_mw.reserve(net.buses.size());
    for (double p : base.injection_p)
        t.injection_magnitude_mw.push_back(std::abs(p));
    return t;
}

SystemTotals system_totals(const Network& net, const SolverOptions& options)
{
    return system_totals(net, solve_power_flow(net, options));
}

}  // namespace relayrisk
